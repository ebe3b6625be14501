//! Parameter scans.

use std::time::Instant;

use rayon::prelude::*;

use crate::curves::{cylinder_over, CylinderOptions};
use crate::error::Result;
use crate::rotational::{shoot_sphere, ShootOptions};

use super::report::{Environment, ScanReport, ScanRow};
use super::runner::{cylinder_signed_q, resolve_checks, run, RunOptions, VERSION};
use super::scenario::{config, Scenario, Subject};

/// Bisection on a sign change of `f` in `[a, b]` down to width `tol`.
pub fn bisect_root<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    if fa == 0.0 {
        return Ok(a);
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bisection on a boolean flag that differs at `a` and `b`.
pub fn bisect_flag<F: Fn(f64) -> bool>(f: F, mut a: f64, mut b: f64, tol: f64) -> [f64; 2] {
    let fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if f(m) == fa {
            a = m;
        } else {
            b = m;
        }
    }
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

fn signed_q(s: &Scenario) -> Result<f64> {
    let spec = s.spec()?;
    match &s.subject {
        Subject::Cylinder { kappa, tau, length } => {
            let mut o = CylinderOptions::default();
            if let Some(l) = length {
                o.length = *l;
            }
            let cyl = cylinder_over(&spec, kappa.profile(), *tau, &o)?;
            cylinder_signed_q(&spec, &cyl)
        }
        _ => Err(config("scan", "signed Q is only defined for cylinders")),
    }
}

/// Runs the scenario at every scan value, in parallel with ordered output.
///
/// Cylinder scans over `kappa` locate the zero of the measured `Re Q(Z,Z)`;
/// sphere scans over `h` locate where shooting starts to converge.
pub fn scan(scenario: &Scenario, opts: &RunOptions) -> Result<ScanReport> {
    let start = Instant::now();
    let spec = scenario
        .scan
        .clone()
        .ok_or_else(|| config("scan", "scenario has no scan section"))?;
    spec.validate()?;
    let checks: Vec<String> = resolve_checks(scenario)?.into_iter().map(|(n, _)| n).collect();
    let variants: Vec<Scenario> = spec
        .values()
        .into_iter()
        .map(|v| scenario.with_param(&spec.param, v))
        .collect::<Result<_>>()?;
    let is_cylinder = matches!(scenario.subject, Subject::Cylinder { .. });
    let rows: Vec<Result<ScanRow>> = variants
        .par_iter()
        .zip(spec.values())
        .map(|(s, value)| {
            let rep = run(s, &RunOptions { timing: false })?;
            Ok(ScanRow {
                value,
                converged: rep.checks.iter().all(|c| c.error.is_none()),
                pass: rep.pass,
                residuals: rep.checks.iter().map(|c| c.residual).collect(),
                signed_q: if is_cylinder { signed_q(s).ok() } else { None },
            })
        })
        .collect();
    let rows: Vec<ScanRow> = rows.into_iter().collect::<Result<_>>()?;

    let mut root = None;
    if is_cylinder && spec.param == "kappa" {
        for w in rows.windows(2) {
            if let (Some(a), Some(b)) = (w[0].signed_q, w[1].signed_q) {
                if a == 0.0 {
                    root = Some(w[0].value);
                    break;
                }
                if a.signum() != b.signum() {
                    let f = |k: f64| signed_q(&scenario.with_param("kappa", k)?);
                    root = Some(bisect_root(f, w[0].value, w[1].value, 1e-10)?);
                    break;
                }
            }
        }
    }

    let mut transition = None;
    if let Subject::Sphere { .. } = scenario.subject {
        if spec.param == "h" {
            let space = scenario.spec()?;
            if let Some(w) = rows.windows(2).find(|w| w[0].converged != w[1].converged) {
                let shoots = |h: f64| shoot_sphere(&space, h, &ShootOptions::default()).is_ok();
                transition = Some(bisect_flag(shoots, w[0].value, w[1].value, 1e-6));
            }
        }
    }

    Ok(ScanReport {
        param: spec.param.clone(),
        checks,
        rows,
        root,
        transition,
        environment: Environment {
            version: VERSION.to_string(),
            seed: scenario.seed,
            timing_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        },
    })
}
