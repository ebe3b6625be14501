//! Report records.

use std::fmt::Write as _;

use serde::Serialize;

use crate::grid::Extremum;
use crate::spaces::SpaceFormRecord;

use super::scenario::Subject;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// Pass iff `residual < tolerance`.
    Below,
    /// Pass iff `residual > tolerance`.
    Above,
}

impl Comparison {
    pub fn passes(self, residual: f64, tolerance: f64) -> bool {
        match self {
            Comparison::Below => residual < tolerance,
            Comparison::Above => residual > tolerance,
        }
    }
}

/// Where a residual was largest: a grid node `(u, v)` or a sample index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Argmax {
    Grid { u: f64, v: f64 },
    Sample { sample: usize },
}

impl Argmax {
    pub fn from_extremum(e: &Extremum<f64>) -> Option<Argmax> {
        e.at.map(|[u, v]| Argmax::Grid { u, v })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// `None` when the check could not be evaluated.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    pub argmax: Option<Argmax>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    pub fn measured(name: &str, residual: f64, tolerance: f64, comparison: Comparison, argmax: Option<Argmax>) -> Self {
        CheckResult {
            name: name.to_string(),
            residual: Some(residual),
            tolerance,
            comparison,
            pass: comparison.passes(residual, tolerance),
            argmax,
            error: None,
        }
    }

    pub fn failed(name: &str, tolerance: f64, comparison: Comparison, error: String) -> Self {
        CheckResult {
            name: name.to_string(),
            residual: None,
            tolerance,
            comparison,
            pass: false,
            argmax: None,
            error: Some(error),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub space: SpaceFormRecord,
    pub subject: Subject,
    pub grid: usize,
    pub checks: Vec<CheckResult>,
    pub notes: Vec<String>,
    pub pass: bool,
    pub environment: Environment,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `name,residual,tolerance,comparison,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,residual,tolerance,comparison,pass\n");
        for c in &self.checks {
            let r = c.residual.map(|x| format!("{x:e}")).unwrap_or_default();
            let cmp = match c.comparison {
                Comparison::Below => "below",
                Comparison::Above => "above",
            };
            let _ = writeln!(out, "{},{},{:e},{},{}", c.name, r, c.tolerance, cmp, c.pass);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub value: f64,
    /// Every check could be evaluated.
    pub converged: bool,
    pub pass: bool,
    pub residuals: Vec<Option<f64>>,
    /// `Re Q(Z,Z)` at the center of a cylinder.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signed_q: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub param: String,
    pub checks: Vec<String>,
    pub rows: Vec<ScanRow>,
    /// Zero of the measured `Re Q(Z,Z)`, refined by bisection.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<f64>,
    /// Interval where the convergence flag flips, refined by bisection.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition: Option<[f64; 2]>,
    pub environment: Environment,
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{},converged,pass", self.param);
        for c in &self.checks {
            let _ = write!(out, ",{c}");
        }
        let signed = self.rows.iter().any(|r| r.signed_q.is_some());
        if signed {
            out.push_str(",signed_q");
        }
        out.push('\n');
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for r in &self.rows {
            let _ = write!(out, "{:e},{},{}", r.value, r.converged, r.pass);
            for x in &r.residuals {
                let _ = write!(out, ",{}", opt(*x));
            }
            if signed {
                let _ = write!(out, ",{}", opt(r.signed_q));
            }
            out.push('\n');
        }
        out
    }
}
