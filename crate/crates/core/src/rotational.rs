//! Rotational constant mean curvature spheres in the real slice
//! `M̄²(ρ/4) × ℝ ⊂ M²(ρ) × ℝ`.
//!
//! The slice is the real-points plane `{y¹ = y² = 0, x³.. = 0}` of the chart,
//! with geodesic polar coordinates `(r, θ)`. A profile `(r(s), h(s))` with
//! `r′ = cos α`, `h′ = sin α` rotated about the `t` axis has principal
//! curvatures `α′` and `sin α·f′(r)/f(r)`, `f` the warping of the slice.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::calculus::fd::{stencil_first, stencil_second};
use crate::calculus::{layout, Jet, MapJet};
use crate::error::{GeomError, Result};
use crate::grid::{max_with_argmax, Extremum, Grid, ParamRect};
use crate::linalg;
use crate::scalar::Analytic;
use crate::spaces::{connection_at, Family, ProductPoint, SpaceFormSpec};
use crate::surface::{geometry_at, AngleDecomposition, Immersion};

/// Warping and chart data of the real slice, a space form of curvature `c = ρ/4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealSlice {
    pub family: Family,
    /// `√|c|`.
    pub k: f64,
}

impl RealSlice {
    pub fn new(spec: &SpaceFormSpec<f64>) -> Self {
        RealSlice {
            family: spec.family(),
            k: (spec.rho().abs() / 4.0).sqrt(),
        }
    }

    pub fn curvature(&self) -> f64 {
        match self.family {
            Family::ComplexProjective => self.k * self.k,
            Family::ComplexHyperbolic => -self.k * self.k,
            Family::Flat => 0.0,
        }
    }

    /// `f(r)` with the polar metric `dr² + f(r)² dθ²`.
    pub fn warp<A: Analytic<f64>>(&self, r: &A) -> A {
        let k = self.k;
        match self.family {
            Family::ComplexProjective => (r.clone() * k).sin() / k,
            Family::ComplexHyperbolic => (r.clone() * k).sinh() / k,
            Family::Flat => r.clone(),
        }
    }

    pub fn warp_prime<A: Analytic<f64>>(&self, r: &A) -> A {
        let k = self.k;
        match self.family {
            Family::ComplexProjective => (r.clone() * k).cos(),
            Family::ComplexHyperbolic => (r.clone() * k).cosh(),
            Family::Flat => r.constant_like(1.0),
        }
    }

    /// Chart radius `|z|` of the point at geodesic distance `r` from the origin.
    pub fn chart_radius<A: Analytic<f64>>(&self, r: &A) -> A {
        let k = self.k;
        match self.family {
            Family::ComplexProjective => (r.clone() * k).tan(),
            Family::ComplexHyperbolic => (r.clone() * k).tanh(),
            Family::Flat => r.clone(),
        }
    }

    /// `d|z|/dr`.
    pub fn chart_radius_prime(&self, r: f64) -> f64 {
        let k = self.k;
        match self.family {
            Family::ComplexProjective => 1.0 / (k * r).cos().powi(2),
            Family::ComplexHyperbolic => 1.0 / (k * r).cosh().powi(2),
            Family::Flat => 1.0,
        }
    }

    /// Geodesic distance of the chart radius `z`; `None` beyond the slice.
    pub fn geodesic_radius(&self, z: f64) -> Option<f64> {
        match self.family {
            Family::ComplexProjective => Some(z.atan() / self.k),
            Family::ComplexHyperbolic => (z < 1.0).then(|| z.atanh() / self.k),
            Family::Flat => Some(z),
        }
    }
}

fn require_slice(spec: &SpaceFormSpec<f64>) -> Result<()> {
    if spec.n() < 2 {
        return Err(GeomError::Dimension(
            "the real slice needs complex dimension at least 2".into(),
        ));
    }
    Ok(())
}

/// Chart point of the slice point with polar coordinates `(r, θ)` at height `t`.
pub fn real_slice_embed(spec: &SpaceFormSpec<f64>, r: f64, theta: f64, t: f64) -> Result<ProductPoint<f64>> {
    require_slice(spec)?;
    let z = RealSlice::new(spec).chart_radius(&r);
    let limit = spec.chart_radius();
    if !(r >= 0.0 && z.is_finite() && z >= 0.0 && z <= limit) {
        return Err(GeomError::OutsideChart { radius: z, limit });
    }
    let mut m = vec![0.0; spec.real_dim()];
    m[0] = z * theta.cos();
    m[2] = z * theta.sin();
    Ok(ProductPoint::new(m, t))
}

/// Shooting controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootOptions {
    /// Pole collar: the profile starts at `r = ε`.
    pub epsilon: f64,
    /// RK4 steps per leg.
    pub steps: usize,
    pub max_iterations: usize,
    /// Target for `|r(end) − ε|`.
    pub tolerance: f64,
    /// Escape radius in the slice.
    pub max_radius: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            epsilon: 1e-4,
            steps: 4000,
            max_iterations: 60,
            tolerance: 1e-12,
            max_radius: 50.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileSample {
    pub s: f64,
    pub r: f64,
    pub h: f64,
    pub alpha: f64,
}

/// Profile samples from pole to pole, with `r′ = cos α`, `h′ = sin α`.
#[derive(Clone, Debug)]
pub struct ProfileCurve {
    pub samples: Vec<ProfileSample>,
    /// Index of the equator sample (`α = π/2`).
    pub equator: usize,
}

impl ProfileCurve {
    pub fn length(&self) -> f64 {
        self.samples.last().map(|s| s.s).unwrap_or(0.0)
    }

    pub fn height(&self) -> f64 {
        self.samples.last().map(|s| s.h).unwrap_or(0.0)
    }

    /// `max |r′² + h′² − 1|` with `r′ = cos α`, `h′ = sin α`.
    pub fn unit_speed_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|p| (p.alpha.cos().powi(2) + p.alpha.sin().powi(2) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |h(S − s) − (h(S) − h(s))|` pairing the sample at angle `α` with
    /// the one at `π − α`; arclength pairs are compared the same way.
    pub fn mirror_defect(&self) -> f64 {
        let (s_tot, h_tot) = (self.length(), self.height());
        let n = self.samples.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let a = &self.samples[i];
            let b = &self.samples[n - 1 - i];
            worst = worst
                .max((b.h - (h_tot - a.h)).abs())
                .max((b.s - (s_tot - a.s)).abs());
        }
        worst
    }

    /// `s, r, h, alpha, H_measured`; `H_measured` is the surface-module mean
    /// curvature of the local surface of revolution, empty outside the chart.
    pub fn to_csv(&self, spec: &SpaceFormSpec<f64>, h_target: f64) -> String {
        let slice = RealSlice::new(spec);
        let mut out = String::from("s,r,h,alpha,H_measured\n");
        for p in &self.samples {
            let a_prime = profile_alpha_prime(&slice, h_target, p.r, p.alpha);
            let measured = if p.r > 0.0 {
                measured_mean_curvature(spec, p.r, p.h, p.alpha, a_prime)
                    .map(|x| format!("{x:e}"))
                    .unwrap_or_default()
            } else {
                String::new()
            };
            let _ = writeln!(out, "{:e},{:e},{:e},{:e},{}", p.s, p.r, p.h, p.alpha, measured);
        }
        out
    }
}

/// `α′ = 2H − sin α·f′(r)/f(r)`; `H` at the pole.
pub fn profile_alpha_prime(slice: &RealSlice, h: f64, r: f64, alpha: f64) -> f64 {
    if r <= 0.0 {
        return h;
    }
    2.0 * h - alpha.sin() * slice.warp_prime(&r) / slice.warp(&r)
}

/// The polynomial surface of revolution through one profile point, matching
/// the profile to second order in `u` (arclength offset); `v = θ`.
#[derive(Clone, Debug)]
pub struct LocalRevolution {
    pub spec: SpaceFormSpec<f64>,
    pub r: f64,
    pub h: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
}

impl Immersion<f64> for LocalRevolution {
    fn rect(&self) -> ParamRect<f64> {
        ParamRect::new(-1e-3, 1e-3, -1e-3, 1e-3)
    }

    fn ambient_dim(&self) -> usize {
        self.spec.ambient_dim()
    }

    fn jet(&self, u: f64, v: f64, order: usize) -> Result<MapJet<f64>> {
        require_slice(&self.spec)?;
        let lay = layout(2, order);
        let uu = Jet::variable(lay, u, 0);
        let th = Jet::variable(lay, v, 1);
        let (sa, ca) = self.alpha.sin_cos();
        let r = uu.clone() * ca + uu.square() * (-0.5 * sa * self.alpha_prime) + self.r;
        let t = uu.clone() * sa + uu.square() * (0.5 * ca * self.alpha_prime) + self.h;
        Ok(MapJet::new(revolve(&RealSlice::new(&self.spec), &self.spec, r, th, t)))
    }
}

fn revolve(slice: &RealSlice, spec: &SpaceFormSpec<f64>, r: Jet<f64>, th: Jet<f64>, t: Jet<f64>) -> Vec<Jet<f64>> {
    let z = slice.chart_radius(&r);
    let mut comps = vec![r.zero_like(); spec.ambient_dim()];
    comps[0] = z.clone() * th.cos();
    comps[2] = z * th.sin();
    comps[spec.real_dim()] = t;
    comps
}

/// `⟨H, N⟩` of the local surface of revolution, `N` the unit profile normal
/// `−sin α ∂_r + cos α ∂_t`.
pub fn measured_mean_curvature(spec: &SpaceFormSpec<f64>, r: f64, h: f64, alpha: f64, alpha_prime: f64) -> Result<f64> {
    let local = LocalRevolution {
        spec: spec.clone(),
        r,
        h,
        alpha,
        alpha_prime,
    };
    let g = geometry_at(spec, &local, 0.0, 0.0)?;
    let slice = RealSlice::new(spec);
    let mut n = vec![0.0; spec.ambient_dim()];
    n[0] = -alpha.sin() * slice.chart_radius_prime(r);
    n[spec.real_dim()] = alpha.cos();
    Ok(g.inner(&g.h, &n))
}

/// Solves `⟨H, N⟩ = H_target` for `α′` with the surface module; the mean
/// curvature is affine in `α′`, so one secant step is exact.
pub fn measured_alpha_prime(spec: &SpaceFormSpec<f64>, h_target: f64, r: f64, alpha: f64) -> Result<f64> {
    let (a0, a1) = (0.0, 1.0);
    let h0 = measured_mean_curvature(spec, r, 0.0, alpha, a0)?;
    let h1 = measured_mean_curvature(spec, r, 0.0, alpha, a1)?;
    if (h1 - h0).abs() < 1e-14 {
        return Err(GeomError::NonAnalytic("mean curvature does not depend on alpha'".into()));
    }
    Ok(a0 + (h_target - h0) * (a1 - a0) / (h1 - h0))
}

/// Converged shooting data.
#[derive(Clone, Debug)]
pub struct ShootResult {
    pub profile: ProfileCurve,
    pub h_target: f64,
    /// `|r(π − Hε) − ε|` at the converged slope.
    pub closure_defect: f64,
    /// `|k − H|/H` for the pole-exit slope `α ≈ k r`.
    pub pole_smoothness_defect: f64,
    pub slope: f64,
    pub iterations: usize,
    pub equator_radius: f64,
    pub equator_height: f64,
}

struct Leg {
    /// `(α, r, h, s)` per node.
    nodes: Vec<[f64; 4]>,
}

fn profile_leg(
    slice: &RealSlice,
    h: f64,
    start: [f64; 4],
    alpha_end: f64,
    opts: &ShootOptions,
) -> Result<Leg> {
    let rhs = |a: f64, y: [f64; 3]| -> Result<[f64; 3]> {
        let r = y[0];
        let big_a = profile_alpha_prime(slice, h, r, a);
        if !(big_a > 1e-6 * h) || !(r < opts.max_radius) || !(r > 0.0) {
            return Err(GeomError::NoSphere(format!(
                "profile escapes before closing (alpha = {a:.6}, r = {r:.6}, alpha' = {big_a:.3e})"
            )));
        }
        Ok([a.cos() / big_a, a.sin() / big_a, 1.0 / big_a])
    };
    let n = opts.steps;
    let da = (alpha_end - start[0]) / n as f64;
    let mut y = [start[1], start[2], start[3]];
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(start);
    for i in 0..n {
        let a = start[0] + i as f64 * da;
        let k1 = rhs(a, y)?;
        let k2 = rhs(a + 0.5 * da, std::array::from_fn(|m| y[m] + 0.5 * da * k1[m]))?;
        let k3 = rhs(a + 0.5 * da, std::array::from_fn(|m| y[m] + 0.5 * da * k2[m]))?;
        let k4 = rhs(a + da, std::array::from_fn(|m| y[m] + da * k3[m]))?;
        for m in 0..3 {
            y[m] += da / 6.0 * (k1[m] + 2.0 * (k2[m] + k3[m]) + k4[m]);
        }
        let a_next = if i + 1 == n { alpha_end } else { start[0] + (i + 1) as f64 * da };
        nodes.push([a_next, y[0], y[1], y[2]]);
    }
    Ok(Leg { nodes })
}

fn shoot_once(slice: &RealSlice, h: f64, k: f64, opts: &ShootOptions) -> Result<(Leg, Leg, f64)> {
    let eps = opts.epsilon;
    let seed = [k * eps, eps, 0.5 * k * eps * eps, eps];
    let lower = profile_leg(slice, h, seed, std::f64::consts::FRAC_PI_2, opts)?;
    let eq = *lower.nodes.last().expect("leg has nodes");
    let upper = profile_leg(slice, h, eq, std::f64::consts::PI - h * eps, opts)?;
    let end = upper.nodes.last().expect("leg has nodes")[1];
    Ok((lower, upper, end - eps))
}

/// Shoots the profile from a regular pole on the pole-exit slope `k`
/// (`α ≈ k r` near the pole) until it closes at the opposite pole.
///
/// Below the hyperbolic existence threshold the profile never turns over and
/// the result is [`GeomError::NoSphere`].
pub fn shoot_sphere(spec: &SpaceFormSpec<f64>, h_target: f64, opts: &ShootOptions) -> Result<ShootResult> {
    require_slice(spec)?;
    if !(h_target > 0.0) {
        return Err(GeomError::NoSphere(format!("H_target = {h_target} must be positive")));
    }
    let eps = opts.epsilon;
    if !(eps > 0.0 && h_target * eps < 0.1) || opts.steps < 10 {
        return Err(GeomError::Dimension("collar or step count out of range".into()));
    }
    let slice = RealSlice::new(spec);
    let residual = |k: f64| shoot_once(&slice, h_target, k, opts).map(|(_, _, r)| r);

    let mut iterations = 0usize;
    let r_mid = residual(h_target)?;
    iterations += 1;
    let (mut lo, mut hi, mut r_lo, mut r_hi) = (h_target, h_target, r_mid, r_mid);
    let mut d = 1e-3;
    while r_lo.signum() == r_hi.signum() && r_mid.abs() > opts.tolerance {
        if iterations >= opts.max_iterations || d > 0.9 {
            return Err(GeomError::NoConvergence {
                iterations,
                defect: r_mid.abs(),
            });
        }
        lo = h_target * (1.0 - d);
        hi = h_target * (1.0 + d);
        r_lo = residual(lo)?;
        r_hi = residual(hi)?;
        iterations += 2;
        d *= 2.0;
    }

    let mut best = (h_target, r_mid);
    if r_mid.abs() > opts.tolerance {
        // Safeguarded secant on the bracket [lo, hi].
        if r_mid.signum() == r_lo.signum() {
            lo = h_target;
            r_lo = r_mid;
        } else {
            hi = h_target;
            r_hi = r_mid;
        }
        loop {
            if iterations >= opts.max_iterations {
                return Err(GeomError::NoConvergence {
                    iterations,
                    defect: best.1.abs(),
                });
            }
            let mut k = hi - r_hi * (hi - lo) / (r_hi - r_lo);
            if !(k > lo.min(hi) && k < lo.max(hi)) {
                k = 0.5 * (lo + hi);
            }
            let r = residual(k)?;
            iterations += 1;
            if r.abs() < best.1.abs() {
                best = (k, r);
            }
            if r.abs() <= opts.tolerance || (hi - lo).abs() < 1e-15 * h_target {
                break;
            }
            if r.signum() == r_lo.signum() {
                lo = k;
                r_lo = r;
            } else {
                hi = k;
                r_hi = r;
            }
        }
    }

    let k = best.0;
    let (lower, upper, closure) = shoot_once(&slice, h_target, k, opts)?;
    let mut samples = Vec::with_capacity(lower.nodes.len() + upper.nodes.len() + 1);
    samples.push(ProfileSample {
        s: 0.0,
        r: 0.0,
        h: 0.0,
        alpha: 0.0,
    });
    let to_sample = |n: &[f64; 4]| ProfileSample {
        s: n[3],
        r: n[1],
        h: n[2],
        alpha: n[0],
    };
    samples.extend(lower.nodes.iter().map(to_sample));
    let equator = samples.len() - 1;
    samples.extend(upper.nodes.iter().skip(1).map(to_sample));
    let last = *samples.last().expect("profile has samples");
    samples.push(ProfileSample {
        s: last.s + last.r,
        r: 0.0,
        h: last.h + 0.5 * h_target * last.r * last.r,
        alpha: std::f64::consts::PI,
    });
    let eq = samples[equator];
    Ok(ShootResult {
        profile: ProfileCurve { samples, equator },
        h_target,
        closure_defect: closure.abs(),
        pole_smoothness_defect: (k - h_target).abs() / h_target,
        slope: k,
        iterations,
        equator_radius: eq.r,
        equator_height: eq.h,
    })
}

/// Controls for the isothermal sphere parametrization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereOptions {
    /// RK4 step in the isothermal coordinate `w`.
    pub dw: f64,
    /// Integration stops once `sin α` falls below this.
    pub stop_sin: f64,
    /// Or once `r` falls below this.
    pub stop_radius: f64,
}

impl Default for SphereOptions {
    fn default() -> Self {
        SphereOptions {
            dw: 1e-3,
            stop_sin: 1e-3,
            stop_radius: 1e-3,
        }
    }
}

/// Profile in the isothermal coordinate `w`, `ds = f dw`:
/// `r_w = f cos α`, `h_w = f sin α`, `α_w = 2H f − sin α f′`.
/// The induced metric is `f²(dw² + dθ²)`.
#[derive(Clone, Debug)]
pub struct IsothermalProfile {
    pub slice: RealSlice,
    pub h_target: f64,
    pub w0: f64,
    pub dw: f64,
    /// `(r, h, α)` at `w0 + i·dw`.
    pub states: Vec<[f64; 3]>,
}

fn iso_rhs(slice: &RealSlice, h: f64, y: [f64; 3]) -> [f64; 3] {
    let f = slice.warp(&y[0]);
    let fp = slice.warp_prime(&y[0]);
    let (sa, ca) = y[2].sin_cos();
    [f * ca, f * sa, 2.0 * h * f - sa * fp]
}

fn iso_step(slice: &RealSlice, h: f64, y: [f64; 3], dw: f64) -> [f64; 3] {
    let k1 = iso_rhs(slice, h, y);
    let k2 = iso_rhs(slice, h, std::array::from_fn(|m| y[m] + 0.5 * dw * k1[m]));
    let k3 = iso_rhs(slice, h, std::array::from_fn(|m| y[m] + 0.5 * dw * k2[m]));
    let k4 = iso_rhs(slice, h, std::array::from_fn(|m| y[m] + dw * k3[m]));
    std::array::from_fn(|m| y[m] + dw / 6.0 * (k1[m] + 2.0 * (k2[m] + k3[m]) + k4[m]))
}

impl IsothermalProfile {
    /// Integrates from the equator (`w = 0`) towards both poles.
    pub fn from_shoot(spec: &SpaceFormSpec<f64>, shot: &ShootResult, opts: &SphereOptions) -> Result<Self> {
        let slice = RealSlice::new(spec);
        let h = shot.h_target;
        let eq = [shot.equator_radius, shot.equator_height, std::f64::consts::FRAC_PI_2];
        let alive = |y: &[f64; 3]| {
            y[2].sin() >= opts.stop_sin && y[0] >= opts.stop_radius && y.iter().all(|x| x.is_finite())
        };
        let run = |dw: f64| {
            let mut out = Vec::new();
            let mut y = eq;
            loop {
                let next = iso_step(&slice, h, y, dw);
                if !alive(&next) || out.len() > 10_000_000 {
                    break;
                }
                out.push(next);
                y = next;
            }
            out
        };
        let mut below = run(-opts.dw);
        let above = run(opts.dw);
        if below.is_empty() || above.is_empty() {
            return Err(GeomError::NoSphere("isothermal profile is empty".into()));
        }
        let w0 = -(below.len() as f64) * opts.dw;
        below.reverse();
        below.push(eq);
        below.extend(above);
        Ok(IsothermalProfile {
            slice,
            h_target: h,
            w0,
            dw: opts.dw,
            states: below,
        })
    }

    pub fn w_range(&self) -> (f64, f64) {
        (self.w0, self.w0 + (self.states.len() - 1) as f64 * self.dw)
    }

    pub fn w(&self, i: usize) -> f64 {
        self.w0 + i as f64 * self.dw
    }

    /// `(r, h, α)` at `w` by a partial RK4 step from the sample below.
    pub fn state_at(&self, w: f64) -> Result<[f64; 3]> {
        let (lo, hi) = self.w_range();
        let slack = 1e-9 * self.dw;
        if !(w >= lo - slack && w <= hi + slack) {
            return Err(GeomError::Dimension(format!(
                "w = {w} outside the integrated range [{lo}, {hi}]"
            )));
        }
        let i = (((w - lo) / self.dw).floor().max(0.0) as usize).min(self.states.len() - 1);
        let dw = w - self.w(i);
        if dw == 0.0 {
            return Ok(self.states[i]);
        }
        Ok(iso_step(&self.slice, self.h_target, self.states[i], dw))
    }

    /// Univariate order-`order` jets of `(r, h, α)` in `w` by Picard iteration.
    pub fn jets(&self, w: f64, order: usize) -> Result<[Jet<f64>; 3]> {
        let y0 = self.state_at(w)?;
        let lay = layout(1, order);
        let base: [Jet<f64>; 3] = std::array::from_fn(|m| Jet::constant(lay, y0[m]));
        let mut y = base.clone();
        for _ in 0..=order {
            let f = self.slice.warp(&y[0]);
            let fp = self.slice.warp_prime(&y[0]);
            let (sa, ca) = (y[2].sin(), y[2].cos());
            let d = [
                f.clone() * ca,
                f.clone() * sa.clone(),
                f * (2.0 * self.h_target) - sa * fp,
            ];
            y = std::array::from_fn(|m| base[m].clone() + d[m].integrate_univariate());
        }
        Ok(y)
    }
}

/// A `w`-interval of the rotational sphere as an isothermal immersion,
/// `(w, θ) ∈ [w₀, w₁] × [0, 2π]`.
#[derive(Clone, Debug)]
pub struct SphereBand {
    pub spec: SpaceFormSpec<f64>,
    pub profile: Arc<IsothermalProfile>,
    pub rect: ParamRect<f64>,
}

impl Immersion<f64> for SphereBand {
    fn rect(&self) -> ParamRect<f64> {
        self.rect
    }

    fn ambient_dim(&self) -> usize {
        self.spec.ambient_dim()
    }

    fn isothermal_claimed(&self) -> bool {
        true
    }

    fn jet(&self, u: f64, v: f64, order: usize) -> Result<MapJet<f64>> {
        if !(1..=3).contains(&order) {
            return Err(GeomError::Dimension(format!(
                "jet order must be 1, 2 or 3, got {order}"
            )));
        }
        let [r, h, _] = self.profile.jets(u, order)?;
        let lay = layout(2, order);
        let r = r.embed(lay, &[0]);
        let h = h.embed(lay, &[0]);
        let th = Jet::variable(lay, v, 1);
        let z = self.profile.slice.chart_radius(&r.value());
        let limit = self.spec.chart_radius();
        if !(z >= 0.0 && z <= limit) {
            return Err(GeomError::OutsideChart { radius: z.abs(), limit });
        }
        Ok(MapJet::new(revolve(&self.profile.slice, &self.spec, r, th, h)))
    }
}

/// A converged rotational sphere with its isothermal parametrization.
#[derive(Clone, Debug)]
pub struct RotationalSphere {
    pub spec: SpaceFormSpec<f64>,
    pub shot: ShootResult,
    pub profile: Arc<IsothermalProfile>,
}

impl RotationalSphere {
    pub fn build(spec: &SpaceFormSpec<f64>, h_target: f64, shoot: &ShootOptions, sphere: &SphereOptions) -> Result<Self> {
        let shot = shoot_sphere(spec, h_target, shoot)?;
        let profile = IsothermalProfile::from_shoot(spec, &shot, sphere)?;
        Ok(RotationalSphere {
            spec: spec.clone(),
            shot,
            profile: Arc::new(profile),
        })
    }

    /// Maximal `w`-intervals that stay inside the chart and off the pole
    /// collar `sin α ≥ mu_min`, each at least `min_width` wide.
    pub fn bands(&self, mu_min: f64, min_width: f64) -> Vec<SphereBand> {
        let limit = self.spec.chart_radius();
        let p = &self.profile;
        let ok = |y: &[f64; 3]| {
            let z = p.slice.chart_radius(&y[0]);
            y[2].sin() >= mu_min && z >= 0.0 && z <= limit
        };
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for i in 0..=p.states.len() {
            let good = i < p.states.len() && ok(&p.states[i]);
            match (good, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    let (w0, w1) = (p.w(s), p.w(i - 1));
                    if w1 > w0 && w1 - w0 >= min_width {
                        out.push(SphereBand {
                            spec: self.spec.clone(),
                            profile: p.clone(),
                            rect: ParamRect::new(w0, w1, 0.0, std::f64::consts::TAU),
                        });
                    }
                    start = None;
                }
                _ => {}
            }
        }
        out
    }
}

/// Grid and collar for the identity suite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaOptions {
    pub nu: usize,
    pub nv: usize,
    /// Nodes with `μ = |ξ^⊤|` below this are excluded.
    pub mu_min: f64,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        LemmaOptions {
            nu: 161,
            nv: 41,
            mu_min: 0.05,
        }
    }
}

/// Maximum residual of each frame identity over the off-collar grid.
#[derive(Clone, Debug, Default)]
pub struct LemmaReport {
    /// `|e₁(μ)|`
    pub e1_mu: Extremum<f64>,
    /// `|e₁(ν)|`
    pub e1_nu: Extremum<f64>,
    /// `|e₂(μ) − λ₂ν|`
    pub e2_mu: Extremum<f64>,
    /// `|e₂(ν) + λ₂μ|`
    pub e2_nu: Extremum<f64>,
    /// `|(∇_{e₂}e₂)^⊤|`
    pub nabla_e2e2: Extremum<f64>,
    /// `|(∇_{e₁}e₁)^⊤ + λ₁(ν/μ)e₂|`
    pub nabla_e1e1: Extremum<f64>,
    /// `max_i |σ(eᵢ,eᵢ) − (λᵢ/|H|)H|`
    pub sigma_diag: Extremum<f64>,
    /// `λ₁,₂` against `|H|(1 ∓ ρμ²/(16|H|²))`.
    pub eigenvalues: Extremum<f64>,
    /// `|Δν² − 2λ₂²(1 − 3ν²)|`
    pub d1: Extremum<f64>,
    /// `|Δ|A|² − (ρ²/(32|H|²))λ₂²μ²(5ν² − 1)|`
    pub d2: Extremum<f64>,
    /// `|μ² + ν² − 1|`
    pub xi_split: Extremum<f64>,
    /// `max_i ‖A_{φeᵢ}‖_F`
    pub a_phi: Extremum<f64>,
    /// `|‖A_H − |H|²Id‖_F − √2|ρ|μ²/16|`
    pub pseudo_umbilical: Extremum<f64>,
    /// `|A|² = Σᵢ ‖A_{νᵢ}‖²_F` over an orthonormal normal frame.
    pub a_norm_convention: &'static str,
    pub mu_min: f64,
    pub bands: usize,
}

impl LemmaReport {
    fn merge(self, o: LemmaReport) -> LemmaReport {
        LemmaReport {
            e1_mu: self.e1_mu.merge(o.e1_mu),
            e1_nu: self.e1_nu.merge(o.e1_nu),
            e2_mu: self.e2_mu.merge(o.e2_mu),
            e2_nu: self.e2_nu.merge(o.e2_nu),
            nabla_e2e2: self.nabla_e2e2.merge(o.nabla_e2e2),
            nabla_e1e1: self.nabla_e1e1.merge(o.nabla_e1e1),
            sigma_diag: self.sigma_diag.merge(o.sigma_diag),
            eigenvalues: self.eigenvalues.merge(o.eigenvalues),
            d1: self.d1.merge(o.d1),
            d2: self.d2.merge(o.d2),
            xi_split: self.xi_split.merge(o.xi_split),
            a_phi: self.a_phi.merge(o.a_phi),
            pseudo_umbilical: self.pseudo_umbilical.merge(o.pseudo_umbilical),
            a_norm_convention: self.a_norm_convention,
            mu_min: self.mu_min,
            bands: self.bands + o.bands,
        }
    }

    /// `(name, residual)` in a fixed order.
    pub fn items(&self) -> Vec<(&'static str, Extremum<f64>)> {
        vec![
            ("e1-mu", self.e1_mu),
            ("e1-nu", self.e1_nu),
            ("e2-mu", self.e2_mu),
            ("e2-nu", self.e2_nu),
            ("nabla-e2e2", self.nabla_e2e2),
            ("nabla-e1e1", self.nabla_e1e1),
            ("sigma-diag", self.sigma_diag),
            ("eigenvalues", self.eigenvalues),
            ("d1", self.d1),
            ("d2", self.d2),
            ("xi-split", self.xi_split),
            ("a-phi", self.a_phi),
            ("pseudo-umbilical", self.pseudo_umbilical),
        ]
    }
}

struct Node {
    mu: f64,
    nu: f64,
    lam1: f64,
    lam2: f64,
    h_norm: f64,
    coeffs: [[f64; 2]; 2],
    e1: Vec<f64>,
    e2: Vec<f64>,
    a2: f64,
    conformal: f64,
    gamma11: Vec<f64>,
    gamma22: Vec<f64>,
    pointwise: [f64; 5],
}

fn lemma_node(spec: &SpaceFormSpec<f64>, band: &SphereBand, u: f64, v: f64) -> Result<Node> {
    let g = geometry_at(spec, band, u, v)?;
    let ad = AngleDecomposition::from_geometry(&g)?;
    let rho = spec.rho();
    let hn = ad.h_norm;
    let mu = ad.mu.unwrap_or(0.0);
    let nu = ad.nu;

    let sig_frame = |x: [f64; 2], y: [f64; 2]| -> Vec<f64> {
        let mut out = vec![0.0; g.dim()];
        for p in 0..2 {
            for q in 0..2 {
                linalg::axpy(x[p] * y[q], &g.sigma_param[p][q], &mut out);
            }
        }
        out
    };
    let c = ad.frame_coeffs;
    let s11 = sig_frame(c[0], c[0]);
    let s12 = sig_frame(c[0], c[1]);
    let s22 = sig_frame(c[1], c[1]);
    let a2 = g.inner(&s11, &s11) + 2.0 * g.inner(&s12, &s12) + g.inner(&s22, &s22);

    let diag = |s: &[f64], lam: f64| g.norm(&linalg::sub(s, &linalg::scaled(lam / hn, &g.h)));
    let sigma_diag = diag(&s11, ad.lambda1).max(diag(&s22, ad.lambda2_eig));

    let shift = rho * mu * mu / (16.0 * hn * hn);
    let eigen = (ad.lambda1 - hn * (1.0 - shift))
        .abs()
        .max((ad.lambda2_eig - hn * (1.0 + shift)).abs());
    let xi_split = (mu * mu + nu * nu - 1.0).abs();

    let frob = |a: [[f64; 2]; 2]| {
        (a[0][0] * a[0][0] + a[1][1] * a[1][1] + 2.0 * a[0][1] * a[0][1]).sqrt()
    };
    let a_phi = frob(g.shape_operator(&g.phi(&ad.e1))?).max(frob(g.shape_operator(&g.phi(&ad.e2))?));
    let ah = g.shape_operator(&g.h)?;
    let h2 = hn * hn;
    let pu = frob([[ah[0][0] - h2, ah[0][1]], [ah[1][0], ah[1][1] - h2]]);
    let pseudo = (pu - std::f64::consts::SQRT_2 * rho.abs() * mu * mu / 16.0).abs();

    let conn = connection_at(spec, &g.point, false)?;
    Ok(Node {
        mu,
        nu,
        lam1: ad.lambda1,
        lam2: ad.lambda2_eig,
        h_norm: hn,
        coeffs: c,
        gamma11: conn.apply(&ad.e1, &ad.e1),
        gamma22: conn.apply(&ad.e2, &ad.e2),
        e1: ad.e1,
        e2: ad.e2,
        a2,
        conformal: g.lambda2,
        pointwise: [sigma_diag, eigen, xi_split, a_phi, pseudo],
    })
}

fn lemma_band(spec: &SpaceFormSpec<f64>, band: &SphereBand, opts: &LemmaOptions) -> Result<LemmaReport> {
    let grid = Grid::new(band.rect, opts.nu, opts.nv);
    grid.require_interior()?;
    let nodes: Vec<Result<Node>> = grid.map(|u, v| lemma_node(spec, band, u, v));
    let nodes: Vec<Node> = nodes.into_iter().collect::<Result<_>>()?;
    let rho = spec.rho();
    let dim = spec.ambient_dim();

    let field = |f: &dyn Fn(&Node) -> f64| -> Vec<f64> { nodes.iter().map(f).collect() };
    let mu = field(&|n| n.mu);
    let nu = field(&|n| n.nu);
    let nu2 = field(&|n| n.nu * n.nu);
    let a2 = field(&|n| n.a2);
    let e1c: Vec<Vec<f64>> = (0..dim).map(|k| field(&|n| n.e1[k])).collect();
    let e2c: Vec<Vec<f64>> = (0..dim).map(|k| field(&|n| n.e2[k])).collect();

    let (hu, hv) = (grid.hu(), grid.hv());
    let grad = |f: &[f64], i: usize, j: usize| {
        [
            stencil_first(grid.along_u(f, i, j), hu),
            stencil_first(grid.along_v(f, i, j), hv),
        ]
    };
    let lap = |f: &[f64], i: usize, j: usize| {
        stencil_second(grid.along_u(f, i, j), hu) + stencil_second(grid.along_v(f, i, j), hv)
    };
    let dir = |c: [f64; 2], d: [f64; 2]| c[0] * d[0] + c[1] * d[1];

    let mut rep = LemmaReport {
        a_norm_convention: "sum over an orthonormal normal frame of squared Frobenius norms",
        mu_min: opts.mu_min,
        bands: 1,
        ..Default::default()
    };
    for (i, j) in grid.interior_nodes() {
        let k = grid.index(i, j);
        let n = &nodes[k];
        let at = [grid.u(i), grid.v(j)];
        let [c1, c2] = n.coeffs;
        let dmu = grad(&mu, i, j);
        let dnu = grad(&nu, i, j);
        rep.e1_mu.update(dir(c1, dmu).abs(), at);
        rep.e1_nu.update(dir(c1, dnu).abs(), at);
        rep.e2_mu.update((dir(c2, dmu) - n.lam2 * n.nu).abs(), at);
        rep.e2_nu.update((dir(c2, dnu) + n.lam2 * n.mu).abs(), at);

        let g = geometry_at(spec, band, at[0], at[1])?;
        let cov = |ec: &[Vec<f64>], c: [f64; 2], gamma: &[f64]| -> Vec<f64> {
            (0..dim)
                .map(|m| dir(c, grad(&ec[m], i, j)) + gamma[m])
                .collect()
        };
        let n22 = g.tangential_part(&cov(&e2c, c2, &n.gamma22));
        rep.nabla_e2e2.update(g.norm(&n22), at);
        let mut n11 = g.tangential_part(&cov(&e1c, c1, &n.gamma11));
        linalg::axpy(n.lam1 * n.nu / n.mu, &n.e2, &mut n11);
        rep.nabla_e1e1.update(g.norm(&n11), at);

        let [sd, ev, xs, ap, pu] = n.pointwise;
        rep.sigma_diag.update(sd, at);
        rep.eigenvalues.update(ev, at);
        rep.xi_split.update(xs, at);
        rep.a_phi.update(ap, at);
        rep.pseudo_umbilical.update(pu, at);

        let inv = 1.0 / n.conformal;
        let d1 = (inv * lap(&nu2, i, j) - 2.0 * n.lam2 * n.lam2 * (1.0 - 3.0 * n.nu * n.nu)).abs();
        rep.d1.update(d1, at);
        let target = rho * rho / (32.0 * n.h_norm * n.h_norm)
            * n.lam2
            * n.lam2
            * n.mu
            * n.mu
            * (5.0 * n.nu * n.nu - 1.0);
        rep.d2.update((inv * lap(&a2, i, j) - target).abs(), at);
    }
    Ok(rep)
}

/// Runs the frame, eigenvalue and Laplacian identities on every band.
pub fn lemma_identity_suite(sphere: &RotationalSphere, opts: &LemmaOptions) -> Result<LemmaReport> {
    let bands = sphere.bands(opts.mu_min, 0.0);
    if bands.is_empty() {
        return Err(GeomError::NoSphere("no chart-visible band off the pole collar".into()));
    }
    let mut out: Option<LemmaReport> = None;
    for b in &bands {
        let r = lemma_band(&sphere.spec, b, opts)?;
        out = Some(match out {
            None => r,
            Some(acc) => acc.merge(r),
        });
    }
    Ok(out.expect("at least one band"))
}

/// `max | |H| − H_target |` over a grid on the band.
pub fn mean_curvature_defect(band: &SphereBand, grid: &Grid<f64>, h_target: f64) -> Result<Extremum<f64>> {
    let vals: Vec<Result<f64>> = grid.map(|u, v| {
        let g = geometry_at(&band.spec, band, u, v)?;
        Ok((g.h_norm() - h_target).abs())
    });
    let mut samples = Vec::with_capacity(vals.len());
    for (k, r) in vals.into_iter().enumerate() {
        let (u, v) = grid.point(k);
        samples.push((r?, [u, v]));
    }
    Ok(max_with_argmax(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_origin_and_domain() {
        let spec = SpaceFormSpec::<f64>::complex_projective(2, 4.0).unwrap();
        let p = real_slice_embed(&spec, 0.0, 1.0, 0.5).unwrap();
        assert_eq!(p.m, vec![0.0; 4]);
        assert_eq!(p.t, 0.5);
        assert!(matches!(
            real_slice_embed(&spec, 1.5, 0.0, 0.0),
            Err(GeomError::OutsideChart { .. })
        ));
        let one = SpaceFormSpec::<f64>::complex_projective(1, 4.0).unwrap();
        assert!(matches!(
            real_slice_embed(&one, 0.1, 0.0, 0.0),
            Err(GeomError::Dimension(_))
        ));
    }

    #[test]
    fn warp_limits() {
        for spec in [
            SpaceFormSpec::<f64>::complex_projective(2, 4.0).unwrap(),
            SpaceFormSpec::<f64>::complex_hyperbolic(2, -4.0).unwrap(),
            SpaceFormSpec::<f64>::flat(2).unwrap(),
        ] {
            let s = RealSlice::new(&spec);
            let r = 1e-6;
            assert!((s.warp(&r) / r - 1.0).abs() < 1e-10);
            assert!((s.warp_prime(&r) - 1.0).abs() < 1e-10);
            let z = s.chart_radius(&0.3);
            assert!((s.geodesic_radius(z).unwrap() - 0.3).abs() < 1e-14);
        }
    }

    #[test]
    fn nonpositive_target_refused() {
        let spec = SpaceFormSpec::<f64>::complex_projective(2, 4.0).unwrap();
        assert!(matches!(
            shoot_sphere(&spec, 0.0, &ShootOptions::default()),
            Err(GeomError::NoSphere(_))
        ));
    }
}
