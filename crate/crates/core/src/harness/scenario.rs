//! Scenario records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curves::CurvatureProfile;
use crate::error::{GeomError, Result};
use crate::spaces::{SpaceFormRecord, SpaceFormSpec};

/// Largest accepted scan.
pub const MAX_SCAN_SAMPLES: usize = 10_000;

fn default_grid() -> usize {
    64
}

fn default_samples() -> usize {
    100
}

/// One verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub space: SpaceFormRecord,
    pub subject: Subject,
    /// Empty means the subject's default checks.
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    /// Random samples for the space checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Subject {
    SpaceChecks,
    Cylinder {
        kappa: KappaSpec,
        tau: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<f64>,
    },
    Sphere {
        h: f64,
        /// Pole collar `|ξ^⊤| ≥ collar` for the surface checks.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        collar: Option<f64>,
    },
    CustomSurface {
        family: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

impl Subject {
    pub fn kind(&self) -> &'static str {
        match self {
            Subject::SpaceChecks => "space-checks",
            Subject::Cylinder { .. } => "cylinder",
            Subject::Sphere { .. } => "sphere",
            Subject::CustomSurface { .. } => "custom-surface",
        }
    }
}

/// A constant curvature or `mean + amplitude·sin(frequency·s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KappaSpec {
    Constant(f64),
    Sine {
        mean: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl KappaSpec {
    pub fn profile(&self) -> CurvatureProfile<f64> {
        match *self {
            KappaSpec::Constant(k) => CurvatureProfile::Constant(k),
            KappaSpec::Sine {
                mean,
                amplitude,
                frequency,
            } => CurvatureProfile::Sine {
                mean,
                amplitude,
                frequency,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub samples: usize,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(config("scan", "range must be finite"));
        }
        if self.samples == 0 || self.samples > MAX_SCAN_SAMPLES {
            return Err(config(
                "scan.samples",
                &format!("must be between 1 and {MAX_SCAN_SAMPLES}"),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| if i + 1 == self.samples { self.to } else { self.from + i as f64 * step })
            .collect()
    }
}

pub(crate) fn config(key: &str, message: &str) -> GeomError {
    GeomError::Config {
        key: key.to_string(),
        message: message.to_string(),
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config("scenario", &e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn spec(&self) -> Result<SpaceFormSpec<f64>> {
        SpaceFormSpec::from_record(&self.space).map_err(|e| config("space", &e.to_string()))
    }

    /// A copy with `param` set to `value`.
    pub fn with_param(&self, param: &str, value: f64) -> Result<Scenario> {
        let mut s = self.clone();
        s.scan = None;
        let key = format!("scan.param={param}");
        match (&mut s.subject, param) {
            (Subject::Cylinder { kappa, .. }, "kappa") => match kappa {
                KappaSpec::Constant(k) => *k = value,
                KappaSpec::Sine { mean, .. } => *mean = value,
            },
            (Subject::Cylinder { tau, .. }, "tau") => *tau = value,
            (Subject::Cylinder { kappa, tau, .. }, "tau-matched") => {
                let rho = self.space.rho;
                *tau = value;
                *kappa = KappaSpec::Constant(crate::curves::vanishing_curvature(rho, value)?);
            }
            (Subject::Cylinder { length, .. }, "length") => *length = Some(value),
            (Subject::Sphere { h, .. }, "h") => *h = value,
            (Subject::CustomSurface { params, .. }, p) => {
                params.insert(p.to_string(), value);
            }
            (_, "rho") => s.space.rho = value,
            _ => return Err(config(&key, "not a scannable parameter of this subject")),
        }
        Ok(s)
    }
}
