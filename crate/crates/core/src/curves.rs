//! Frenet curves in `M^n(ρ)`, circles with prescribed complex torsion and the
//! vertical cylinders `π⁻¹(γ) ⊂ M^n(ρ) × ℝ` over them.

use std::fmt::Write as _;

use crate::calculus::{fd, layout, Jet, MapJet};
use crate::error::{GeomError, Result};
use crate::grid::{Extremum, Grid, ParamRect};
use crate::linalg::{self, Mat};
use crate::qforms::{QGrid, Which};
use crate::scalar::Real;
use crate::spaces::{complex_rotate, connection_at, Connection, MetricModel, ProductPoint, SpaceFormSpec};
use crate::surface::{pmc_residual, Immersion};

/// Minimum integrator resolution.
pub const MIN_STEPS_PER_UNIT: f64 = 100.0;

/// A curvature as a function of arclength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurvatureProfile<T> {
    Constant(T),
    /// `mean + amplitude·sin(frequency·s)`.
    Sine { mean: T, amplitude: T, frequency: T },
}

impl<T: Real> CurvatureProfile<T> {
    pub fn value(&self, s: T) -> T {
        match *self {
            CurvatureProfile::Constant(k) => k,
            CurvatureProfile::Sine {
                mean,
                amplitude,
                frequency,
            } => mean + amplitude * (frequency * s).sin(),
        }
    }

    pub fn derivative(&self, s: T) -> T {
        match *self {
            CurvatureProfile::Constant(_) => T::zero(),
            CurvatureProfile::Sine {
                amplitude,
                frequency,
                ..
            } => amplitude * frequency * (frequency * s).cos(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CurvatureProfile::Constant(_))
    }
}

/// Position and Frenet frame `E₁..E_r` in the chart of `M` (`2n` components
/// each), with curvatures `κ₁..κ_{r−1}`.
#[derive(Clone, Debug)]
pub struct FrenetState<T> {
    pub p: Vec<T>,
    pub frame: Vec<Vec<T>>,
    pub curvatures: Vec<CurvatureProfile<T>>,
}

impl<T: Real> FrenetState<T> {
    pub fn order(&self) -> usize {
        self.frame.len()
    }
}

fn m_metric<T: Real>(spec: &SpaceFormSpec<T>, p: &[T]) -> Result<Mat<T>> {
    spec.check_domain(p)?;
    let d = p.len();
    Ok(Mat::from_rows(d, d, spec.metric_block(p)))
}

fn m_connection<T: Real>(spec: &SpaceFormSpec<T>, p: &[T], derivatives: bool) -> Result<Connection<T>> {
    let point = ProductPoint::new(p.to_vec(), T::zero());
    Ok(connection_at(spec, &point, derivatives)?.horizontal())
}

/// Initial frame of a circle of curvature `κ` and complex torsion
/// `τ = ⟨E₁, JE₂⟩`, with `E₁` along `∂x¹`.
pub fn circle_initial_frame<T: Real>(
    spec: &SpaceFormSpec<T>,
    p: &[T],
    kappa: T,
    tau: T,
) -> Result<FrenetState<T>> {
    let mut dir = vec![T::zero(); p.len()];
    dir[0] = T::one();
    frenet_initial_frame(spec, p, CurvatureProfile::Constant(kappa), tau, &dir)
}

/// `E₁ = dir/|dir|`, `E₂ = −τ JE₁ + √(1−τ²) W` with `W` the first chart axis
/// not in `span{E₁, JE₁}`, made orthonormal to it.
pub fn frenet_initial_frame<T: Real>(
    spec: &SpaceFormSpec<T>,
    p: &[T],
    kappa: CurvatureProfile<T>,
    tau: T,
    dir: &[T],
) -> Result<FrenetState<T>> {
    if !(tau.abs() <= T::one()) {
        return Err(GeomError::TorsionOutOfRange(tau.to_f64().unwrap_or(f64::NAN)));
    }
    if tau.abs() < T::one() && spec.n() < 2 {
        return Err(GeomError::Dimension(
            "complex torsion below 1 in absolute value needs n >= 2".into(),
        ));
    }
    if dir.len() != spec.real_dim() {
        return Err(GeomError::Dimension(format!(
            "direction has {} components, expected {}",
            dir.len(),
            spec.real_dim()
        )));
    }
    let g = m_metric(spec, p)?;
    let n1 = linalg::norm(&g, dir);
    if !(n1 > T::zero()) {
        return Err(GeomError::Dimension("zero initial direction".into()));
    }
    let e1 = linalg::scaled(n1.recip(), dir);
    let je1: Vec<T> = complex_rotate::<T, T>(&e1);
    let mut e2 = linalg::scaled(-tau, &je1);
    let root = (T::one() - tau * tau).max(T::zero()).sqrt();
    if root > T::zero() {
        let d = p.len();
        let w = (0..d)
            .find_map(|k| {
                let mut w = vec![T::zero(); d];
                w[k] = T::one();
                for b in [&e1, &je1] {
                    let c = linalg::inner(&g, &w, b);
                    linalg::axpy(-c, b, &mut w);
                }
                let n = linalg::norm(&g, &w);
                (n > T::lit(1e-6)).then(|| linalg::scaled(n.recip(), &w))
            })
            .ok_or_else(|| GeomError::Dimension("no axis outside span{E1, JE1}".into()))?;
        linalg::axpy(root, &w, &mut e2);
    }
    Ok(FrenetState {
        p: p.to_vec(),
        frame: vec![e1, e2],
        curvatures: vec![kappa],
    })
}

#[derive(Clone, Debug)]
pub struct FrenetSample<T> {
    pub s: T,
    pub p: Vec<T>,
    pub frame: Vec<Vec<T>>,
}

/// An integrated Frenet curve sampled at uniform arclength steps.
#[derive(Clone, Debug)]
pub struct FrenetCurve<T> {
    pub spec: SpaceFormSpec<T>,
    pub curvatures: Vec<CurvatureProfile<T>>,
    pub step: T,
    pub samples: Vec<FrenetSample<T>>,
    /// The curve left the chart before the requested length.
    pub truncated: bool,
}

type State<T> = Vec<Vec<T>>;

fn frenet_rhs<T: Real>(spec: &SpaceFormSpec<T>, kappas: &[CurvatureProfile<T>], s: T, y: &State<T>) -> Result<State<T>> {
    let conn = m_connection(spec, &y[0], false)?;
    let r = y.len() - 1;
    let e1 = &y[1];
    let mut out = Vec::with_capacity(y.len());
    out.push(e1.clone());
    for i in 0..r {
        let mut d: Vec<T> = conn.apply(e1, &y[1 + i]).iter().map(|x| -*x).collect();
        if i > 0 {
            linalg::axpy(-kappas[i - 1].value(s), &y[i], &mut d);
        }
        if i + 1 < r {
            linalg::axpy(kappas[i].value(s), &y[2 + i], &mut d);
        }
        out.push(d);
    }
    Ok(out)
}

fn combine<T: Real>(y: &State<T>, h: T, k: &State<T>) -> State<T> {
    y.iter()
        .zip(k)
        .map(|(a, b)| a.iter().zip(b).map(|(x, z)| *x + h * *z).collect())
        .collect()
}

fn rk4_step<T: Real>(
    spec: &SpaceFormSpec<T>,
    kappas: &[CurvatureProfile<T>],
    s: T,
    y: &State<T>,
    h: T,
) -> Result<State<T>> {
    let half = T::lit(0.5);
    let k1 = frenet_rhs(spec, kappas, s, y)?;
    let k2 = frenet_rhs(spec, kappas, s + half * h, &combine(y, half * h, &k1))?;
    let k3 = frenet_rhs(spec, kappas, s + half * h, &combine(y, half * h, &k2))?;
    let k4 = frenet_rhs(spec, kappas, s + h, &combine(y, h, &k3))?;
    let six = T::lit(6.0);
    let mut out = y.clone();
    for (c, ((a, b), (cc, d))) in out.iter_mut().zip(k1.iter().zip(&k2).zip(k3.iter().zip(&k4))) {
        for m in 0..c.len() {
            c[m] += h / six * (a[m] + T::lit(2.0) * (b[m] + cc[m]) + d[m]);
        }
    }
    let g = m_metric(spec, &out[0])?;
    if !linalg::gram_schmidt(&g, &mut out[1..], T::lit(1e-12)) {
        return Err(GeomError::NonAnalytic("Frenet frame collapsed".into()));
    }
    Ok(out)
}

/// Classical RK4 on the Frenet system with Gram–Schmidt after every step.
pub fn integrate_frenet<T: Real>(
    spec: &SpaceFormSpec<T>,
    init: &FrenetState<T>,
    length: T,
    steps: usize,
) -> Result<FrenetCurve<T>> {
    let per_unit = T::from_usize_lossy(steps) / length;
    if !(length > T::zero()) || per_unit < T::lit(MIN_STEPS_PER_UNIT) {
        return Err(GeomError::TooFewSteps {
            steps,
            length: length.to_f64().unwrap_or(f64::NAN),
        });
    }
    if init.curvatures.len() + 1 != init.frame.len() {
        return Err(GeomError::Dimension(
            "a frame of order r needs r - 1 curvatures".into(),
        ));
    }
    let h = length / T::from_usize_lossy(steps);
    let mut y: State<T> = std::iter::once(init.p.clone())
        .chain(init.frame.iter().cloned())
        .collect();
    let g = m_metric(spec, &y[0])?;
    if !linalg::gram_schmidt(&g, &mut y[1..], T::lit(1e-12)) {
        return Err(GeomError::Dimension("initial frame is degenerate".into()));
    }
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(FrenetSample {
        s: T::zero(),
        p: y[0].clone(),
        frame: y[1..].to_vec(),
    });
    let mut truncated = false;
    for k in 0..steps {
        let s = T::from_usize_lossy(k) * h;
        match rk4_step(spec, &init.curvatures, s, &y, h) {
            Ok(next) => y = next,
            Err(GeomError::OutsideChart { radius, limit }) => {
                log::warn!(
                    "curve left the chart at s = {s} (|z| = {radius:.4} > {limit:.4}); truncating"
                );
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
        samples.push(FrenetSample {
            s: T::from_usize_lossy(k + 1) * h,
            p: y[0].clone(),
            frame: y[1..].to_vec(),
        });
    }
    Ok(FrenetCurve {
        spec: spec.clone(),
        curvatures: init.curvatures.clone(),
        step: h,
        samples,
        truncated,
    })
}

/// `τᵢⱼ = ⟨Eᵢ, J Eⱼ⟩` along the samples, `i < j`.
#[derive(Clone, Debug)]
pub struct ComplexTorsionRecord<T> {
    pub s: Vec<T>,
    pub pairs: Vec<((usize, usize), Vec<T>)>,
}

impl<T: Real> ComplexTorsionRecord<T> {
    pub fn series(&self, i: usize, j: usize) -> Option<&[T]> {
        self.pairs
            .iter()
            .find(|(ij, _)| *ij == (i, j))
            .map(|(_, v)| v.as_slice())
    }

    /// `max − min` of `τᵢⱼ`.
    pub fn drift(&self, i: usize, j: usize) -> T {
        self.series(i, j)
            .map(|v| {
                let lo = v.iter().fold(T::infinity(), |a, b| a.min(*b));
                let hi = v.iter().fold(T::neg_infinity(), |a, b| a.max(*b));
                hi - lo
            })
            .unwrap_or_else(T::zero)
    }

    pub fn max_abs(&self) -> T {
        self.pairs
            .iter()
            .flat_map(|(_, v)| v.iter())
            .fold(T::zero(), |a, b| a.max(b.abs()))
    }
}

impl<T: Real> FrenetCurve<T> {
    pub fn length(&self) -> T {
        self.samples.last().map(|s| s.s).unwrap_or_else(T::zero)
    }

    /// Frame at arclength `s` by a partial RK4 step from the sample below.
    pub fn state_at(&self, s: T) -> Result<FrenetSample<T>> {
        let len = self.length();
        let tol = self.step * T::lit(1e-9);
        if s < -tol || s > len + tol {
            return Err(GeomError::Dimension(format!(
                "arclength {s} outside the integrated range [0, {len}]"
            )));
        }
        let k = (s / self.step)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.samples.len() - 1);
        let base = &self.samples[k];
        let ds = s - base.s;
        if ds == T::zero() {
            return Ok(base.clone());
        }
        let y: State<T> = std::iter::once(base.p.clone())
            .chain(base.frame.iter().cloned())
            .collect();
        let y = rk4_step(&self.spec, &self.curvatures, base.s, &y, ds)?;
        Ok(FrenetSample {
            s,
            p: y[0].clone(),
            frame: y[1..].to_vec(),
        })
    }

    pub fn torsion_record(&self) -> ComplexTorsionRecord<T> {
        let r = self.curvatures.len() + 1;
        let mut pairs = Vec::new();
        for i in 0..r {
            for j in i + 1..r {
                let series = self
                    .samples
                    .iter()
                    .map(|smp| {
                        let g = m_metric(&self.spec, &smp.p).expect("sample inside chart");
                        linalg::inner(&g, &smp.frame[i], &complex_rotate::<T, T>(&smp.frame[j]))
                    })
                    .collect();
                pairs.push(((i + 1, j + 1), series));
            }
        }
        ComplexTorsionRecord {
            s: self.samples.iter().map(|x| x.s).collect(),
            pairs,
        }
    }

    /// `max |⟨Eᵢ, Eⱼ⟩ − δᵢⱼ|` over the samples.
    pub fn frame_defect(&self) -> T {
        let mut worst = T::zero();
        for smp in &self.samples {
            let g = m_metric(&self.spec, &smp.p).expect("sample inside chart");
            for (i, a) in smp.frame.iter().enumerate() {
                for (j, b) in smp.frame.iter().enumerate() {
                    let target = if i == j { T::one() } else { T::zero() };
                    worst = worst.max((linalg::inner(&g, a, b) - target).abs());
                }
            }
        }
        worst
    }

    /// `max ||γ′| − 1|` with `γ′` by fourth-order differences of the sampled
    /// positions.
    pub fn speed_defect(&self) -> T {
        let d = self.spec.real_dim();
        let comps: Vec<Vec<T>> = (0..d)
            .map(|k| self.samples.iter().map(|s| s.p[k]).collect())
            .collect();
        let mut worst = T::zero();
        for (i, smp) in self.samples.iter().enumerate() {
            let v: Vec<T> = comps.iter().map(|c| fd::sampled_first(c, i, self.step)).collect();
            let g = m_metric(&self.spec, &smp.p).expect("sample inside chart");
            worst = worst.max((linalg::norm(&g, &v) - T::one()).abs());
        }
        worst
    }

    /// `|∇_{E₁}E₁|` at each sample, with `dE₁/ds` by fourth-order differences.
    pub fn measured_curvature(&self) -> Result<Vec<(T, T)>> {
        let d = self.spec.real_dim();
        let comps: Vec<Vec<T>> = (0..d)
            .map(|k| self.samples.iter().map(|s| s.frame[0][k]).collect())
            .collect();
        self.samples
            .iter()
            .enumerate()
            .map(|(i, smp)| {
                let de: Vec<T> = comps.iter().map(|c| fd::sampled_first(c, i, self.step)).collect();
                let conn = m_connection(&self.spec, &smp.p, false)?;
                let cov = linalg::add(&de, &conn.apply(&smp.frame[0], &smp.frame[0]));
                let g = m_metric(&self.spec, &smp.p)?;
                Ok((smp.s, linalg::norm(&g, &cov)))
            })
            .collect()
    }

    /// `s, chart coordinates…, kappa, tau12`.
    pub fn to_csv(&self) -> String {
        let d = self.spec.real_dim();
        let taus = self.torsion_record();
        let tau12 = taus.series(1, 2).map(|v| v.to_vec());
        let mut out = String::from("s");
        for k in 0..d / 2 {
            let _ = write!(out, ",x{},y{}", k + 1, k + 1);
        }
        out.push_str(",kappa,tau12\n");
        for (i, smp) in self.samples.iter().enumerate() {
            let _ = write!(out, "{:e}", smp.s);
            for x in &smp.p {
                let _ = write!(out, ",{x:e}");
            }
            let kappa = self.curvatures.first().map(|k| k.value(smp.s)).unwrap_or_else(T::zero);
            let tau = tau12.as_ref().map(|v| format!("{:e}", v[i])).unwrap_or_default();
            let _ = writeln!(out, ",{kappa:e},{tau}");
        }
        out
    }
}

/// The vertical cylinder `(s, t) ↦ (γ(s), t)` over an integrated curve.
#[derive(Clone, Debug)]
pub struct Cylinder<T> {
    pub curve: FrenetCurve<T>,
    pub height: (T, T),
}

/// Vertical cylinder over `curve` for `t ∈ [t₀, t₁]`.
pub fn build_cylinder<T: Real>(curve: FrenetCurve<T>, height: (T, T)) -> Cylinder<T> {
    Cylinder { curve, height }
}

impl<T: Real> Cylinder<T> {
    /// `γ′, γ″, γ‴` at arclength `s` from the Frenet equations.
    pub fn derivatives(&self, s: T) -> Result<(FrenetSample<T>, [Vec<T>; 3])> {
        let smp = self.curve.state_at(s)?;
        let conn = m_connection(&self.curve.spec, &smp.p, true)?;
        let kappas = &self.curve.curvatures;
        let e = &smp.frame;
        let e1 = &e[0];
        let k1 = kappas[0].value(s);
        let dk1 = kappas[0].derivative(s);
        let g11 = conn.apply(e1, e1);
        let mut d2 = linalg::scaled(k1, &e[1]);
        linalg::axpy(-T::one(), &g11, &mut d2);

        // E₂′ = −κ₁E₁ + κ₂E₃ − Γ(E₁, E₂)
        let mut de2 = linalg::scaled(-k1, e1);
        if e.len() > 2 {
            linalg::axpy(kappas[1].value(s), &e[2], &mut de2);
        }
        linalg::axpy(-T::one(), &conn.apply(e1, &e[1]), &mut de2);
        let mut d3 = linalg::scaled(dk1, &e[1]);
        linalg::axpy(k1, &de2, &mut d3);
        linalg::axpy(-T::one(), &conn.apply_derivative(e1, e1, e1), &mut d3);
        linalg::axpy(-T::lit(2.0), &conn.apply(&d2, e1), &mut d3);
        let d1 = e1.clone();
        Ok((smp, [d1, d2, d3]))
    }
}

impl<T: Real> Immersion<T> for Cylinder<T> {
    fn rect(&self) -> ParamRect<T> {
        ParamRect::new(T::zero(), self.curve.length(), self.height.0, self.height.1)
    }

    fn ambient_dim(&self) -> usize {
        self.curve.spec.ambient_dim()
    }

    fn isothermal_claimed(&self) -> bool {
        true
    }

    fn jet(&self, u: T, v: T, order: usize) -> Result<MapJet<T>> {
        if !(1..=3).contains(&order) {
            return Err(GeomError::Dimension(format!(
                "jet order must be 1, 2 or 3, got {order}"
            )));
        }
        let (smp, d) = self.derivatives(u)?;
        let lay = layout(2, order);
        let mut comps = Vec::with_capacity(smp.p.len() + 1);
        let inv_fact = [T::one(), T::one(), T::lit(0.5), T::one() / T::lit(6.0)];
        for k in 0..smp.p.len() {
            let mut j = Jet::constant(lay, smp.p[k]);
            for m in 1..=order {
                let idx = lay.index_of(&[m as u8, 0]).expect("monomial in layout");
                j.coeffs_mut()[idx] = d[m - 1][k] * inv_fact[m];
            }
            comps.push(j);
        }
        comps.push(Jet::variable(lay, v, 1));
        Ok(MapJet::new(comps))
    }
}

/// Controls for building and sampling a cylinder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderOptions<T> {
    pub length: T,
    pub steps_per_unit: usize,
    pub height: (T, T),
    pub grid: usize,
}

impl<T: Real> Default for CylinderOptions<T> {
    fn default() -> Self {
        CylinderOptions {
            length: T::lit(2.0),
            steps_per_unit: 1000,
            height: (-T::one(), T::one()),
            grid: 64,
        }
    }
}

impl<T: Real> CylinderOptions<T> {
    pub fn steps(&self) -> usize {
        (self.length * T::from_usize_lossy(self.steps_per_unit))
            .ceil()
            .to_usize()
            .unwrap_or(0)
    }
}

/// Cylinder over the curve with curvature `kappa` and torsion `tau` starting
/// at the chart origin along `∂x¹`.
pub fn cylinder_over<T: Real>(
    spec: &SpaceFormSpec<T>,
    kappa: CurvatureProfile<T>,
    tau: T,
    opts: &CylinderOptions<T>,
) -> Result<Cylinder<T>> {
    let origin = vec![T::zero(); spec.real_dim()];
    let mut dir = vec![T::zero(); spec.real_dim()];
    dir[0] = T::one();
    let init = frenet_initial_frame(spec, &origin, kappa, tau, &dir)?;
    let curve = integrate_frenet(spec, &init, opts.length, opts.steps())?;
    Ok(build_cylinder(curve, opts.height))
}

/// The curvature `κ = ½√(−ρ(1 + 3τ²))` at which `Q(Z,Z)` vanishes on a pmc
/// cylinder; only exists for `ρ < 0`.
pub fn vanishing_curvature<T: Real>(rho: T, tau: T) -> Result<T> {
    if !(rho < T::zero()) {
        return Err(GeomError::NoVanishingCylinder(rho.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(T::lit(0.5) * (-rho * (T::one() + T::lit(3.0) * tau * tau)).sqrt())
}

/// Measured cylinder data against the closed-form predicate
/// `4κ² + ρ(1 + 3τ²) = 0`.
#[derive(Clone, Debug)]
pub struct CylinderClassification<T> {
    pub kappa: T,
    pub tau: T,
    pub pmc_residual: Extremum<T>,
    pub pmc: bool,
    /// `max |Q(Z,Z)|` over the grid.
    pub q_max: Extremum<T>,
    pub q_vanishes: bool,
    /// `4κ² + ρ(1 + 3τ²)`.
    pub predicate: T,
    pub predicate_vanishes: bool,
    /// `max |H|` over the grid.
    pub h_norm: T,
    /// `√−ρ/4 ≤ |H| ≤ √−ρ/2`; `None` for `ρ ≥ 0`.
    pub h_bounds: Option<bool>,
    /// Whether a `Q`-vanishing cylinder can exist at all (`ρ < 0`).
    pub vanishing_possible: bool,
}

pub fn classify_cylinder<T: Real>(
    spec: &SpaceFormSpec<T>,
    kappa: T,
    tau: T,
    opts: &CylinderOptions<T>,
) -> Result<CylinderClassification<T>> {
    let cyl = cylinder_over(spec, CurvatureProfile::Constant(kappa), tau, opts)?;
    let grid = Grid::square(cyl.rect(), opts.grid);
    let pmc = pmc_residual(spec, &cyl, &grid)?;
    let q = QGrid::compute(spec, &cyl, &grid)?;
    let q_max = q.max_abs(Which::Q);
    let h_norm = q
        .values
        .iter()
        .fold(T::zero(), |a, v| a.max(v.h_norm));
    let rho = spec.rho();
    let predicate = T::lit(4.0) * kappa * kappa + rho * (T::one() + T::lit(3.0) * tau * tau);
    let tol = T::lit(1e-8);
    let h_bounds = (rho < T::zero()).then(|| {
        let r = (-rho).sqrt();
        let slack = T::lit(1e-8);
        h_norm >= r / T::lit(4.0) - slack && h_norm <= r / T::lit(2.0) + slack
    });
    Ok(CylinderClassification {
        kappa,
        tau,
        pmc: pmc.value < T::lit(1e-6),
        pmc_residual: pmc,
        q_vanishes: q_max.value < tol,
        q_max,
        predicate,
        predicate_vanishes: predicate.abs() < tol,
        h_norm,
        h_bounds,
        vanishing_possible: rho < T::zero(),
    })
}
