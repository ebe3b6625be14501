//! Scenario execution.

use std::cell::OnceCell;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curves::{cylinder_over, Cylinder, CylinderOptions};
use crate::error::{GeomError, Result};
use crate::grid::{max_with_argmax, Extremum, Grid, ParamRect};
use crate::linalg;
use crate::qforms::{q_value, QGrid, Which};
use crate::rotational::{
    lemma_identity_suite, mean_curvature_defect, LemmaOptions, LemmaReport, RotationalSphere,
    ShootOptions, SphereBand, SphereOptions,
};
use crate::spaces::{
    connection_at, cosymplectic_frame_at, curvature_model_with, metric_at, parallelism_residuals,
    ProductPoint, Riemann, SpaceFormSpec, TangentVec,
};
use crate::surface::families::{analytic_patch, holomorphic_plane, real_plane};
use crate::surface::{
    anti_invariance_residual, gauss_curvature, gauss_curvature_isothermal_grid, geometry_at,
    pmc_residual, pseudo_umbilical_residual, weingarten_residual, Immersion,
};

use super::checks::{lookup, registry, CheckDef, LEMMA_ITEMS};
use super::report::{Argmax, CheckResult, Environment, Report};
use super::scenario::{config, Scenario, Subject};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default pole collar for sphere surface checks.
pub const DEFAULT_COLLAR: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Record wall-clock time in the report (breaks byte-identical reruns).
    pub timing: bool,
}

type Measured = Result<(f64, Option<Argmax>)>;

fn from_extremum(e: Extremum<f64>) -> (f64, Option<Argmax>) {
    (e.value, Argmax::from_extremum(&e))
}

/// Resolves requested check names against the registry, expanding
/// `lemma-suite` and applying tolerance overrides.
pub fn resolve_checks(scenario: &Scenario) -> Result<Vec<(String, CheckDef)>> {
    let kind = scenario.subject.kind();
    let names: Vec<String> = if scenario.checks.is_empty() {
        registry(kind)
            .iter()
            .filter(|c| c.default)
            .map(|c| c.name.to_string())
            .collect()
    } else {
        scenario.checks.clone()
    };
    let mut out = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let def = lookup(kind, name).ok_or_else(|| {
            config(
                &format!("checks[{i}]"),
                &format!("unknown check `{name}` for subject {kind}"),
            )
        })?;
        if kind == "sphere" && name == "lemma-suite" {
            for item in LEMMA_ITEMS {
                out.push((format!("lemma-suite/{}", item.name), *item));
            }
        } else {
            out.push((name.clone(), def));
        }
    }
    for (key, tol) in &scenario.tolerances {
        if lookup(kind, key).is_none() {
            return Err(config(
                &format!("tolerances.{key}"),
                &format!("unknown check for subject {kind}"),
            ));
        }
        if !tol.is_finite() {
            return Err(config(&format!("tolerances.{key}"), "must be finite"));
        }
        for (name, def) in out.iter_mut() {
            if name == key {
                def.tolerance = *tol;
            }
        }
    }
    Ok(out)
}

/// Runs every requested check; configuration problems are errors, geometry
/// failures are recorded per check.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<Report> {
    let start = Instant::now();
    let spec = scenario.spec()?;
    let checks = resolve_checks(scenario)?;
    let mut notes = Vec::new();
    let results = match &scenario.subject {
        Subject::SpaceChecks => {
            let ctx = SpaceContext::new(&spec, scenario.seed, scenario.samples);
            notes.push(format!("{} seeded samples", scenario.samples));
            evaluate(&checks, |name| ctx.measure(name))
        }
        Subject::Cylinder { kappa, tau, length } => {
            let mut copts = CylinderOptions {
                grid: scenario.grid,
                ..CylinderOptions::default()
            };
            if let Some(l) = length {
                copts.length = *l;
            }
            let ctx = CylinderContext {
                spec: &spec,
                cyl: cylinder_over(&spec, kappa.profile(), *tau, &copts),
                qgrid: OnceCell::new(),
                grid: scenario.grid,
            };
            if let Ok(c) = &ctx.cyl {
                if c.curve.truncated {
                    notes.push(format!(
                        "curve left the chart; truncated at s = {}",
                        c.curve.length()
                    ));
                }
            }
            evaluate(&checks, |name| ctx.measure(name))
        }
        Subject::Sphere { h, collar } => {
            let collar = collar.unwrap_or(DEFAULT_COLLAR);
            let ctx = SphereContext::new(&spec, *h, collar, scenario.grid);
            match &ctx.sphere {
                Ok(s) => {
                    for b in &ctx.bands {
                        notes.push(format!("band w in [{}, {}]", b.rect.u0, b.rect.u1));
                    }
                    notes.push(format!("pole collar |xi^T| >= {collar}"));
                    notes.push(format!("pole-exit slope {}", s.shot.slope));
                    notes.push(
                        "|A|^2 is the sum over an orthonormal normal frame of squared Frobenius norms"
                            .into(),
                    );
                }
                Err(e) => notes.push(e.to_string()),
            }
            evaluate(&checks, |name| ctx.measure(name))
        }
        Subject::CustomSurface { family, params } => {
            let imm = custom_surface(&spec, family, params)?;
            let ctx = CustomContext {
                spec: &spec,
                grid: Grid::square(imm.rect(), scenario.grid),
                imm,
            };
            evaluate(&checks, |name| ctx.measure(name))
        }
    };
    let pass = results.iter().all(|c| c.pass);
    Ok(Report {
        space: scenario.space.clone(),
        subject: scenario.subject.clone(),
        grid: scenario.grid,
        checks: results,
        notes,
        pass,
        environment: Environment {
            version: VERSION.to_string(),
            seed: scenario.seed,
            timing_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        },
    })
}

fn evaluate<F: Fn(&str) -> Measured>(checks: &[(String, CheckDef)], measure: F) -> Vec<CheckResult> {
    checks
        .iter()
        .map(|(name, def)| match measure(name) {
            Ok((r, at)) => CheckResult::measured(name, r, def.tolerance, def.comparison, at),
            Err(e) => CheckResult::failed(name, def.tolerance, def.comparison, e.to_string()),
        })
        .collect()
}

struct SpaceSample {
    p: ProductPoint<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
}

struct SpaceContext {
    /// Per sample: curvature-model, phi-sectional, xi-flat, bianchi,
    /// phi-squared, phi-metric, nabla-phi, nabla-xi.
    rows: Result<Vec<[f64; 8]>>,
}

const SPACE_ORDER: [&str; 8] = [
    "curvature-model",
    "phi-sectional",
    "xi-flat",
    "bianchi",
    "phi-squared",
    "phi-metric",
    "nabla-phi",
    "nabla-xi",
];

impl SpaceContext {
    fn new(spec: &SpaceFormSpec<f64>, seed: u64, samples: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = spec.ambient_dim();
        let cap = 2.0;
        let pts: Vec<SpaceSample> = (0..samples)
            .map(|_| {
                let p = spec.sample_point(&mut rng, cap);
                let mut vec = || (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
                SpaceSample {
                    p,
                    u: vec(),
                    v: vec(),
                    w: vec(),
                }
            })
            .collect();
        let rows: Vec<Result<[f64; 8]>> = pts.par_iter().map(|s| space_row(spec, s)).collect();
        SpaceContext {
            rows: rows.into_iter().collect(),
        }
    }

    fn measure(&self, name: &str) -> Measured {
        let rows = self.rows.as_ref().map_err(Clone::clone)?;
        let k = SPACE_ORDER
            .iter()
            .position(|n| *n == name)
            .expect("registered space check");
        let e = max_with_argmax(rows.iter().enumerate().map(|(i, r)| (r[k], [i as f64, 0.0])));
        Ok((e.value, e.at.map(|a| Argmax::Sample { sample: a[0] as usize })))
    }
}

fn space_row(spec: &SpaceFormSpec<f64>, s: &SpaceSample) -> Result<[f64; 8]> {
    let conn = connection_at(spec, &s.p, true)?;
    let riem = Riemann::from_connection(&conn);
    let g = metric_at(spec, &s.p)?;
    let rho = spec.rho();
    let (u, v, w) = (&s.u, &s.v, &s.w);

    let model = curvature_model_with(rho, &g, u, v, w);
    let numeric = riem.apply(u, v, w);
    let curv = linalg::max_abs(&linalg::sub(&numeric, &model));

    let dim = u.len();
    let mut x = u.clone();
    x[dim - 1] = 0.0;
    let n = linalg::norm(&g, &x);
    let x = linalg::scaled(1.0 / n, &x);
    let frame = cosymplectic_frame_at(spec, &s.p)?;
    let px = frame.phi_of(&x);
    let denom = linalg::inner(&g, &x, &x) * linalg::inner(&g, &px, &px) - linalg::inner(&g, &x, &px).powi(2);
    let sect = linalg::inner(&g, &riem.apply(&x, &px, &px), &x) / denom;
    let phi_sect = (sect - rho).abs();

    let xi = frame.xi.0.clone();
    let xi_flat = linalg::max_abs(&riem.apply(u, &xi, &xi));

    let b = linalg::add(
        &linalg::add(&riem.apply(u, v, w), &riem.apply(v, w, u)),
        &riem.apply(w, u, v),
    );
    let bianchi = linalg::max_abs(&b);

    let phi_sq = frame.phi_squared_defect(u);
    let phi_metric = frame.phi_metric_defect(u, v);
    let par = parallelism_residuals(
        spec,
        std::slice::from_ref(&s.p),
        &[TangentVec(u.clone()), TangentVec(v.clone()), TangentVec(w.clone())],
    )?;
    Ok([curv, phi_sect, xi_flat, bianchi, phi_sq, phi_metric, par.nabla_phi, par.nabla_xi])
}

struct CylinderContext<'a> {
    spec: &'a SpaceFormSpec<f64>,
    cyl: Result<Cylinder<f64>>,
    qgrid: OnceCell<Result<QGrid<f64>>>,
    grid: usize,
}

impl CylinderContext<'_> {
    fn cylinder(&self) -> Result<&Cylinder<f64>> {
        self.cyl.as_ref().map_err(Clone::clone)
    }

    fn grid(&self) -> Result<Grid<f64>> {
        Ok(Grid::square(self.cylinder()?.rect(), self.grid))
    }

    fn qgrid(&self) -> Result<&QGrid<f64>> {
        self.qgrid
            .get_or_init(|| QGrid::compute(self.spec, self.cylinder()?, &self.grid()?))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn measure(&self, name: &str) -> Measured {
        let cyl = self.cylinder()?;
        match name {
            "pmc" | "pmc-violated" => Ok(from_extremum(pmc_residual(self.spec, cyl, &self.grid()?)?)),
            "qzero" => Ok(from_extremum(self.qgrid()?.max_abs(Which::Q))),
            "dbar-q" | "dbar-q-violated" => Ok(from_extremum(self.qgrid()?.dbar(Which::Q)?.normalized)),
            "dbar-qprime" => Ok(from_extremum(self.qgrid()?.dbar(Which::QPrime)?.normalized)),
            "h-norm" => {
                let q = self.qgrid()?;
                let k = cyl.curve.curvatures[0];
                Ok(from_extremum(max_with_argmax(
                    q.values
                        .iter()
                        .map(|v| ((v.h_norm - 0.5 * k.value(v.at[0]).abs()).abs(), v.at)),
                )))
            }
            "frame" => Ok((cyl.curve.frame_defect(), None)),
            "torsion-drift" => Ok((cyl.curve.torsion_record().drift(1, 2), None)),
            "curvature-recovery" => {
                let k = cyl.curve.curvatures[0];
                let e = max_with_argmax(
                    cyl.curve
                        .measured_curvature()?
                        .into_iter()
                        .map(|(s, m)| ((m - k.value(s).abs()).abs(), [s, 0.0])),
                );
                Ok(from_extremum(e))
            }
            "h-bounds" => {
                let rho = self.spec.rho();
                if rho >= 0.0 {
                    return Err(GeomError::NoVanishingCylinder(rho));
                }
                let r = (-rho).sqrt();
                let q = self.qgrid()?;
                Ok(from_extremum(max_with_argmax(q.values.iter().map(|v| {
                    let viol = (r / 4.0 - v.h_norm).max(v.h_norm - r / 2.0).max(0.0);
                    (viol, v.at)
                }))))
            }
            _ => unreachable!("unregistered cylinder check {name}"),
        }
    }
}

/// `Re Q(Z,Z)` at the center of the cylinder's parameter rectangle.
pub fn cylinder_signed_q(spec: &SpaceFormSpec<f64>, cyl: &Cylinder<f64>) -> Result<f64> {
    let r = cyl.rect();
    let q = q_value(spec, cyl, 0.5 * (r.u0 + r.u1), 0.5 * (r.v0 + r.v1))?;
    Ok(q.q.re)
}

struct SphereContext<'a> {
    spec: &'a SpaceFormSpec<f64>,
    h: f64,
    collar: f64,
    grid: usize,
    sphere: Result<RotationalSphere>,
    bands: Vec<SphereBand>,
    qgrids: OnceCell<Result<Vec<QGrid<f64>>>>,
    lemma: OnceCell<Result<LemmaReport>>,
}

impl<'a> SphereContext<'a> {
    fn new(spec: &'a SpaceFormSpec<f64>, h: f64, collar: f64, grid: usize) -> Self {
        let sphere = RotationalSphere::build(spec, h, &ShootOptions::default(), &SphereOptions::default());
        let bands = sphere
            .as_ref()
            .map(|s| s.bands(collar, 0.0))
            .unwrap_or_default();
        SphereContext {
            spec,
            h,
            collar,
            grid,
            sphere,
            bands,
            qgrids: OnceCell::new(),
            lemma: OnceCell::new(),
        }
    }

    fn sphere(&self) -> Result<&RotationalSphere> {
        self.sphere.as_ref().map_err(Clone::clone)
    }

    fn band_grids(&self) -> Result<Vec<(&SphereBand, Grid<f64>)>> {
        if self.bands.is_empty() {
            return Err(GeomError::NoSphere("no chart-visible band off the pole collar".into()));
        }
        Ok(self
            .bands
            .iter()
            .map(|b| (b, Grid::square(b.rect, self.grid)))
            .collect())
    }

    fn over_bands<F>(&self, f: F) -> Measured
    where
        F: Fn(&SphereBand, &Grid<f64>) -> Result<Extremum<f64>>,
    {
        let mut acc = Extremum::zero();
        for (b, g) in self.band_grids()? {
            acc = acc.merge(f(b, &g)?);
        }
        Ok(from_extremum(acc))
    }

    fn qgrids(&self) -> Result<&Vec<QGrid<f64>>> {
        self.qgrids
            .get_or_init(|| {
                self.band_grids()?
                    .into_iter()
                    .map(|(b, g)| QGrid::compute(self.spec, b, &g))
                    .collect()
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn over_qgrids<F>(&self, f: F) -> Measured
    where
        F: Fn(&QGrid<f64>) -> Result<Extremum<f64>>,
    {
        let mut acc = Extremum::zero();
        for q in self.qgrids()? {
            acc = acc.merge(f(q)?);
        }
        Ok(from_extremum(acc))
    }

    fn lemma(&self) -> Result<&LemmaReport> {
        self.lemma
            .get_or_init(|| {
                let opts = LemmaOptions {
                    mu_min: self.collar,
                    ..LemmaOptions::default()
                };
                lemma_identity_suite(self.sphere()?, &opts)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn measure(&self, name: &str) -> Measured {
        let sphere = self.sphere()?;
        if let Some(item) = name.strip_prefix("lemma-suite/") {
            let rep = self.lemma()?;
            let e = rep
                .items()
                .into_iter()
                .find(|(n, _)| *n == item)
                .map(|(_, e)| e)
                .expect("registered lemma item");
            return Ok(from_extremum(e));
        }
        match name {
            "closure" => Ok((sphere.shot.closure_defect, None)),
            "pole-smoothness" => Ok((sphere.shot.pole_smoothness_defect, None)),
            "mirror" => Ok((sphere.shot.profile.mirror_defect(), None)),
            "unit-speed" => Ok((sphere.shot.profile.unit_speed_defect(), None)),
            "h-const" => self.over_bands(|b, g| mean_curvature_defect(b, g, self.h)),
            "pmc" => self.over_bands(|b, g| pmc_residual(self.spec, b, g)),
            "anti-invariance" => self.over_bands(|b, g| anti_invariance_residual(self.spec, b, g)),
            "q-vanish" => self.over_qgrids(|q| Ok(q.max_abs_normalized(Which::Q))),
            "qprime-vanish" => self.over_qgrids(|q| Ok(q.max_abs_normalized(Which::QPrime))),
            "dbar" => self.over_qgrids(|q| Ok(q.dbar(Which::Q)?.normalized)),
            "dbar-qprime" => self.over_qgrids(|q| Ok(q.dbar(Which::QPrime)?.normalized)),
            _ => unreachable!("unregistered sphere check {name}"),
        }
    }
}

fn param(params: &std::collections::BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Builds a built-in surface family by name.
pub fn custom_surface(
    spec: &SpaceFormSpec<f64>,
    family: &str,
    params: &std::collections::BTreeMap<String, f64>,
) -> Result<Box<dyn Immersion<f64>>> {
    let allowed: &[&str] = match family {
        "holomorphic-plane" => &["center-x", "center-y", "scale", "height", "u0", "u1", "v0", "v1"],
        "real-plane" => &["scale", "height", "u0", "u1", "v0", "v1"],
        "analytic-patch" => &["scale", "amplitude", "u0", "u1", "v0", "v1"],
        _ => {
            return Err(config(
                "subject.family",
                &format!(
                    "unknown family `{family}`; expected holomorphic-plane, real-plane or analytic-patch"
                ),
            ))
        }
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(config(
            &format!("subject.params.{k}"),
            &format!("unknown parameter for {family}"),
        ));
    }
    let rect = ParamRect::new(
        param(params, "u0", -0.5),
        param(params, "u1", 0.5),
        param(params, "v0", -0.5),
        param(params, "v1", 0.5),
    );
    let n = spec.n();
    let scale = param(params, "scale", 0.5);
    let bad = |e: GeomError| config("subject.family", &e.to_string());
    Ok(match family {
        "holomorphic-plane" => Box::new(
            holomorphic_plane(
                n,
                [param(params, "center-x", 0.0), param(params, "center-y", 0.0)],
                scale,
                param(params, "height", 0.0),
                rect,
            )
            .map_err(bad)?,
        ),
        "real-plane" => Box::new(real_plane(n, scale, param(params, "height", 0.0), rect).map_err(bad)?),
        _ => Box::new(analytic_patch(n, scale, param(params, "amplitude", 0.1), rect).map_err(bad)?),
    })
}

struct CustomContext<'a> {
    spec: &'a SpaceFormSpec<f64>,
    imm: Box<dyn Immersion<f64>>,
    grid: Grid<f64>,
}

impl CustomContext<'_> {
    fn measure(&self, name: &str) -> Measured {
        let (spec, imm, grid) = (self.spec, &self.imm, &self.grid);
        match name {
            "weingarten" => Ok(from_extremum(weingarten_residual(spec, imm, grid)?)),
            "pmc" => Ok(from_extremum(pmc_residual(spec, imm, grid)?)),
            "anti-invariance" => Ok(from_extremum(anti_invariance_residual(spec, imm, grid)?)),
            "pseudo-umbilical" => Ok(from_extremum(pseudo_umbilical_residual(spec, imm, grid)?)),
            "qzero" => Ok(from_extremum(QGrid::compute(spec, imm, grid)?.max_abs(Which::Q))),
            "dbar-q" => Ok(from_extremum(QGrid::compute(spec, imm, grid)?.dbar(Which::Q)?.normalized)),
            "dbar-qprime" => Ok(from_extremum(
                QGrid::compute(spec, imm, grid)?.dbar(Which::QPrime)?.normalized,
            )),
            "gauss" => {
                let intrinsic = gauss_curvature_isothermal_grid(spec, imm, grid)?;
                let mut e = Extremum::zero();
                for ((i, j), k) in intrinsic {
                    let (u, v) = (grid.u(i), grid.v(j));
                    let g = geometry_at(spec, imm, u, v)?;
                    e.update((gauss_curvature(spec, &g)? - k).abs(), [u, v]);
                }
                Ok(from_extremum(e))
            }
            _ => unreachable!("unregistered custom check {name}"),
        }
    }
}
