//! Model complex space forms `M^n(ρ)` and the product cosymplectic structure
//! on `M^n(ρ) × ℝ`.
//!
//! Real chart coordinates are ordered `(x¹, y¹, …, xⁿ, yⁿ, t)` with
//! `J ∂xᵏ = ∂yᵏ`. The metric on the `M` block is the Fubini–Study (ρ > 0),
//! Bergman (ρ < 0) or flat (ρ = 0) model scaled by `4/|ρ|`, so that the
//! holomorphic sectional curvature is exactly `ρ`:
//!
//! ```text
//! g = (4/|ρ|) [ D·I − ε (p pᵀ + Jp (Jp)ᵀ) ] / D²,   D = 1 + ε|p|²,  ε = sign ρ
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{layout, Jet};
use crate::error::{GeomError, Result};
use crate::linalg::{self, Mat};
use crate::scalar::{Analytic, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Affine chart of ℂPⁿ.
    #[serde(rename = "CP")]
    ComplexProjective,
    /// Unit-ball chart of ℂHⁿ.
    #[serde(rename = "CH")]
    ComplexHyperbolic,
    /// Global chart of ℂⁿ.
    #[serde(rename = "C")]
    Flat,
}

impl Family {
    pub fn default_chart_radius(self) -> f64 {
        match self {
            Family::ComplexProjective => 2.0,
            Family::ComplexHyperbolic => 0.9,
            Family::Flat => 1.0e6,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Family::ComplexProjective => "CP",
            Family::ComplexHyperbolic => "CH",
            Family::Flat => "C",
        }
    }
}

/// Serializable selector `{family, n, rho}` with an optional chart radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormRecord {
    pub family: Family,
    pub n: usize,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_radius: Option<f64>,
}

/// Ambient geometry selector.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceFormSpec<T> {
    family: Family,
    n: usize,
    rho: T,
    chart_radius: T,
}

impl<T: Real> SpaceFormSpec<T> {
    pub fn new(family: Family, n: usize, rho: T) -> Result<Self> {
        if n == 0 {
            return Err(GeomError::InvalidSpace("complex dimension must be >= 1".into()));
        }
        let ok = match family {
            Family::ComplexProjective => rho > T::zero(),
            Family::ComplexHyperbolic => rho < T::zero(),
            Family::Flat => rho == T::zero(),
        };
        if !ok || !rho.is_finite() {
            return Err(GeomError::InvalidSpace(format!(
                "family {} is incompatible with rho = {rho}",
                family.tag()
            )));
        }
        Ok(SpaceFormSpec {
            family,
            n,
            rho,
            chart_radius: T::lit(family.default_chart_radius()),
        })
    }

    pub fn complex_projective(n: usize, rho: T) -> Result<Self> {
        Self::new(Family::ComplexProjective, n, rho)
    }

    pub fn complex_hyperbolic(n: usize, rho: T) -> Result<Self> {
        Self::new(Family::ComplexHyperbolic, n, rho)
    }

    pub fn flat(n: usize) -> Result<Self> {
        Self::new(Family::Flat, n, T::zero())
    }

    /// Overrides the chart-domain radius. The ball chart stays strictly
    /// inside the unit ball.
    pub fn with_chart_radius(mut self, radius: T) -> Result<Self> {
        if !(radius > T::zero())
            || (self.family == Family::ComplexHyperbolic && radius >= T::one())
        {
            return Err(GeomError::InvalidSpace(format!(
                "chart radius {radius} invalid for family {}",
                self.family.tag()
            )));
        }
        self.chart_radius = radius;
        Ok(self)
    }

    pub fn from_record(rec: &SpaceFormRecord) -> Result<Self> {
        let spec = Self::new(rec.family, rec.n, T::lit(rec.rho))?;
        match rec.chart_radius {
            Some(r) => spec.with_chart_radius(T::lit(r)),
            None => Ok(spec),
        }
    }

    pub fn record(&self) -> SpaceFormRecord {
        SpaceFormRecord {
            family: self.family,
            n: self.n,
            rho: self.rho.to_f64().unwrap_or(f64::NAN),
            chart_radius: None,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn chart_radius(&self) -> T {
        self.chart_radius
    }

    /// Real dimension `2n` of `M`.
    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    /// Real dimension `2n + 1` of `M × ℝ`.
    pub fn ambient_dim(&self) -> usize {
        2 * self.n + 1
    }

    /// `(ε, s)` with `g = s·[D I − ε(ppᵀ + Jp Jpᵀ)]/D²`.
    fn model_constants(&self) -> (T, T) {
        match self.family {
            Family::Flat => (T::zero(), T::one()),
            Family::ComplexProjective => (T::one(), T::lit(4.0) / self.rho),
            Family::ComplexHyperbolic => (-T::one(), T::lit(4.0) / -self.rho),
        }
    }

    /// Draws a point uniformly from the chart disk of radius
    /// `min(chart_radius, cap)` (cap keeps ℂⁿ samples bounded).
    pub fn sample_point<R: Rng>(&self, rng: &mut R, cap: T) -> ProductPoint<T> {
        let radius = self.chart_radius.min(cap);
        loop {
            let m: Vec<T> = (0..self.real_dim())
                .map(|_| T::lit(rng.gen_range(-1.0..1.0)) * radius)
                .collect();
            if linalg::dot(&m, &m).sqrt() < radius {
                let t = T::lit(rng.gen_range(-1.0..1.0));
                return ProductPoint::new(m, t);
            }
        }
    }
}

/// A metric on the `M` block of the product chart, expressed as an analytic
/// formula so it can be expanded in jets.
pub trait MetricModel<T: Real>: Sync {
    /// Real dimension of `M`.
    fn real_dim(&self) -> usize;

    fn check_domain(&self, m: &[T]) -> Result<()>;

    /// Row-major `2n × 2n` metric coefficients at `m`.
    fn metric_block<A: Analytic<T>>(&self, m: &[A]) -> Vec<A>;
}

impl<T: Real> MetricModel<T> for SpaceFormSpec<T> {
    fn real_dim(&self) -> usize {
        2 * self.n
    }

    fn check_domain(&self, m: &[T]) -> Result<()> {
        if m.len() != self.real_dim() {
            return Err(GeomError::Dimension(format!(
                "expected {} chart coordinates, got {}",
                self.real_dim(),
                m.len()
            )));
        }
        let r = linalg::dot(m, m).sqrt();
        if !(r <= self.chart_radius) {
            return Err(GeomError::OutsideChart {
                radius: r.to_f64().unwrap_or(f64::NAN),
                limit: self.chart_radius.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    fn metric_block<A: Analytic<T>>(&self, m: &[A]) -> Vec<A> {
        let dim = m.len();
        let (eps, s) = self.model_constants();
        if eps == T::zero() {
            return (0..dim * dim)
                .map(|k| m[0].constant_like(if k / dim == k % dim { s } else { T::zero() }))
                .collect();
        }
        let q = complex_rotate(m);
        let mut r2 = m[0].zero_like();
        for x in m {
            r2 = r2 + x.square();
        }
        let d = r2 * eps + T::one();
        let inv_d2 = (d.square()).recip() * s;
        let mut g = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut e = (m[i].clone() * m[j].clone() + q[i].clone() * q[j].clone()) * (-eps);
                if i == j {
                    e = e + d.clone();
                }
                g.push(e * inv_d2.clone());
            }
        }
        g
    }
}

/// `J v` on the `M` block: `J ∂xᵏ = ∂yᵏ`, `J ∂yᵏ = −∂xᵏ`.
pub fn complex_rotate<T: Real, A: Analytic<T>>(v: &[A]) -> Vec<A> {
    let mut out = Vec::with_capacity(v.len());
    for k in 0..v.len() / 2 {
        out.push(-v[2 * k + 1].clone());
        out.push(v[2 * k].clone());
    }
    out
}

/// `φ U` on the full product tangent space (`φ = J ∘ dπ`).
pub fn apply_phi<T: Real>(u: &[T]) -> Vec<T> {
    let dim = u.len();
    let mut out = complex_rotate::<T, T>(&u[..dim - 1]);
    out.push(T::zero());
    out
}

/// A point of `M^n(ρ) × ℝ` in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint<T> {
    pub m: Vec<T>,
    pub t: T,
}

impl<T: Real> ProductPoint<T> {
    pub fn new(m: Vec<T>, t: T) -> Self {
        ProductPoint { m, t }
    }

    pub fn origin(n: usize) -> Self {
        ProductPoint {
            m: vec![T::zero(); 2 * n],
            t: T::zero(),
        }
    }

    /// `(m, t)` flattened.
    pub fn coords(&self) -> Vec<T> {
        let mut c = self.m.clone();
        c.push(self.t);
        c
    }

    pub fn from_coords(c: &[T]) -> Self {
        let (m, t) = c.split_at(c.len() - 1);
        ProductPoint {
            m: m.to_vec(),
            t: t[0],
        }
    }
}

/// Tangent vector of `M × ℝ`: `2n` horizontal components followed by the
/// `ξ` coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVec<T>(pub Vec<T>);

impl<T: Real> TangentVec<T> {
    pub fn zeros(dim: usize) -> Self {
        TangentVec(vec![T::zero(); dim])
    }

    pub fn components(&self) -> &[T] {
        &self.0
    }

    pub fn scale(&self, a: T) -> Self {
        TangentVec(linalg::scaled(a, &self.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.0.len(), other.0.len());
        TangentVec(linalg::add(&self.0, &other.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.0.len(), other.0.len());
        TangentVec(linalg::sub(&self.0, &other.0))
    }

    pub fn max_abs(&self) -> T {
        linalg::max_abs(&self.0)
    }
}

/// The structure tensors `(g, φ, ξ, η)` at one point.
#[derive(Clone, Debug)]
pub struct CosymplecticFrame<T> {
    pub g: Mat<T>,
    pub phi: Mat<T>,
    pub xi: TangentVec<T>,
    pub eta: Vec<T>,
}

impl<T: Real> CosymplecticFrame<T> {
    pub fn eta_of(&self, u: &[T]) -> T {
        linalg::dot(&self.eta, u)
    }

    pub fn phi_of(&self, u: &[T]) -> Vec<T> {
        self.phi.mul_vec(u)
    }

    /// `‖φ²U + U − η(U)ξ‖∞`.
    pub fn phi_squared_defect(&self, u: &[T]) -> T {
        let pp = self.phi_of(&self.phi_of(u));
        let e = self.eta_of(u);
        pp.iter()
            .zip(u)
            .zip(&self.xi.0)
            .fold(T::zero(), |m, ((a, b), x)| m.max((*a + *b - e * *x).abs()))
    }

    /// `|⟨φU, φV⟩ − ⟨U, V⟩ + η(U)η(V)|`.
    pub fn phi_metric_defect(&self, u: &[T], v: &[T]) -> T {
        let lhs = self.g.bilinear(&self.phi_of(u), &self.phi_of(v));
        (lhs - self.g.bilinear(u, v) + self.eta_of(u) * self.eta_of(v)).abs()
    }
}

fn full_metric<T: Real>(block: &[T], real_dim: usize) -> Mat<T> {
    let dim = real_dim + 1;
    let mut g = Mat::zeros(dim, dim);
    for i in 0..real_dim {
        for j in 0..real_dim {
            g[(i, j)] = block[i * real_dim + j];
        }
    }
    g[(real_dim, real_dim)] = T::one();
    g
}

/// Product metric `⟨,⟩_M + dt²` at `p`.
pub fn metric_at<T: Real, M: MetricModel<T>>(model: &M, p: &ProductPoint<T>) -> Result<Mat<T>> {
    model.check_domain(&p.m)?;
    Ok(full_metric(&model.metric_block(&p.m), model.real_dim()))
}

pub fn cosymplectic_frame_at<T: Real, M: MetricModel<T>>(
    model: &M,
    p: &ProductPoint<T>,
) -> Result<CosymplecticFrame<T>> {
    let g = metric_at(model, p)?;
    let dim = g.rows();
    let mut phi = Mat::zeros(dim, dim);
    for k in 0..(dim - 1) / 2 {
        phi[(2 * k + 1, 2 * k)] = T::one();
        phi[(2 * k, 2 * k + 1)] = -T::one();
    }
    let mut xi = vec![T::zero(); dim];
    xi[dim - 1] = T::one();
    Ok(CosymplecticFrame {
        g,
        phi,
        xi: TangentVec(xi.clone()),
        eta: xi,
    })
}

/// Levi-Civita connection coefficients of the product metric at a point,
/// optionally with their first chart derivatives.
///
/// Indices run over all `2n + 1` product coordinates; every entry touching the
/// `t` index is zero.
#[derive(Clone, Debug)]
pub struct Connection<T> {
    dim: usize,
    metric: Mat<T>,
    metric_d: Vec<T>,
    gamma: Vec<T>,
    dgamma: Option<Vec<T>>,
}

impl<T: Real> Connection<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &Mat<T> {
        &self.metric
    }

    /// `∂_m g_ij`.
    pub fn metric_derivative(&self, m: usize, i: usize, j: usize) -> T {
        let d = self.dim;
        self.metric_d[(m * d + i) * d + j]
    }

    /// `Γ^k_ij`.
    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> T {
        let d = self.dim;
        self.gamma[(k * d + i) * d + j]
    }

    /// `∂_m Γ^k_ij`; zero when derivatives were not requested.
    #[inline]
    pub fn dgamma(&self, m: usize, k: usize, i: usize, j: usize) -> T {
        let d = self.dim;
        match &self.dgamma {
            Some(dg) => dg[((m * d + k) * d + i) * d + j],
            None => T::zero(),
        }
    }

    /// All `Γ^k_ij`, indexed `(k·d + i)·d + j`.
    pub fn gamma_slice(&self) -> &[T] {
        &self.gamma
    }

    pub fn has_derivatives(&self) -> bool {
        self.dgamma.is_some()
    }

    /// `Γ(x, y)^k = Γ^k_ij xⁱ yʲ`.
    pub fn apply(&self, x: &[T], y: &[T]) -> Vec<T> {
        let d = self.dim;
        (0..d)
            .map(|k| {
                let mut acc = T::zero();
                for i in 0..d {
                    if x[i] == T::zero() {
                        continue;
                    }
                    for j in 0..d {
                        acc += self.gamma[(k * d + i) * d + j] * x[i] * y[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// `(∂_w Γ)(x, y)^k = w^m ∂_m Γ^k_ij xⁱ yʲ`.
    pub fn apply_derivative(&self, w: &[T], x: &[T], y: &[T]) -> Vec<T> {
        let d = self.dim;
        let mut out = vec![T::zero(); d];
        let Some(dg) = &self.dgamma else {
            return out;
        };
        for m in 0..d {
            if w[m] == T::zero() {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                let mut acc = T::zero();
                for i in 0..d {
                    for j in 0..d {
                        acc += dg[((m * d + k) * d + i) * d + j] * x[i] * y[j];
                    }
                }
                *o += w[m] * acc;
            }
        }
        out
    }

    /// Restriction to the `M` block (drops the `t` index).
    pub fn horizontal(&self) -> Connection<T> {
        let d = self.dim - 1;
        let big = self.dim;
        let mut gamma = vec![T::zero(); d * d * d];
        let mut metric_d = vec![T::zero(); d * d * d];
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    gamma[(k * d + i) * d + j] = self.gamma[(k * big + i) * big + j];
                    metric_d[(k * d + i) * d + j] = self.metric_d[(k * big + i) * big + j];
                }
            }
        }
        let dgamma = self.dgamma.as_ref().map(|dg| {
            let mut out = vec![T::zero(); d * d * d * d];
            for m in 0..d {
                for k in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            out[((m * d + k) * d + i) * d + j] =
                                dg[((m * big + k) * big + i) * big + j];
                        }
                    }
                }
            }
            out
        });
        let mut metric = Mat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                metric[(i, j)] = self.metric[(i, j)];
            }
        }
        Connection {
            dim: d,
            metric,
            metric_d,
            gamma,
            dgamma,
        }
    }
}

/// Christoffel symbols from exact metric jets. With `derivatives`, the metric
/// is expanded to second order and `∂Γ` is filled in as well.
pub fn connection_at<T: Real, M: MetricModel<T>>(
    model: &M,
    p: &ProductPoint<T>,
    derivatives: bool,
) -> Result<Connection<T>> {
    model.check_domain(&p.m)?;
    let rd = model.real_dim();
    let dim = rd + 1;
    let order = if derivatives { 2 } else { 1 };
    let lay = layout(rd, order);
    let vars: Vec<Jet<T>> = p
        .m
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet::variable(lay, x, i))
        .collect();
    let block = model.metric_block(&vars);
    if block.iter().any(|j| !Analytic::is_finite(j)) {
        return Err(GeomError::NonAnalytic("metric not finite at point".into()));
    }

    let idx3 = |a: usize, b: usize, c: usize| (a * dim + b) * dim + c;
    let mut g = Mat::zeros(dim, dim);
    g[(rd, rd)] = T::one();
    // dg[m][i][j] = ∂_m g_ij
    let mut dg = vec![T::zero(); dim * dim * dim];
    for i in 0..rd {
        for j in 0..rd {
            let e = &block[i * rd + j];
            g[(i, j)] = e.value();
            for m in 0..rd {
                dg[idx3(m, i, j)] = e.d1(m);
            }
        }
    }
    let ginv = g
        .inverse()
        .ok_or_else(|| GeomError::NonAnalytic("metric is singular".into()))?;

    // Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut lower = vec![T::zero(); dim * dim * dim];
    let half = T::lit(0.5);
    for l in 0..rd {
        for i in 0..rd {
            for j in 0..rd {
                lower[idx3(l, i, j)] =
                    half * (dg[idx3(i, j, l)] + dg[idx3(j, i, l)] - dg[idx3(l, i, j)]);
            }
        }
    }
    let mut gamma = vec![T::zero(); dim * dim * dim];
    for k in 0..rd {
        for i in 0..rd {
            for j in 0..rd {
                let mut acc = T::zero();
                for l in 0..rd {
                    acc += ginv[(k, l)] * lower[idx3(l, i, j)];
                }
                gamma[idx3(k, i, j)] = acc;
            }
        }
    }

    let dgamma = if derivatives {
        // ∂_m Γ^k_ij = g^{kl} (∂_m Γ_{l,ij} − ∂_m g_{la} Γ^a_ij)
        let mut out = vec![T::zero(); dim * dim * dim * dim];
        let mut d2 = vec![T::zero(); rd * rd * rd * rd];
        let i4 = |a: usize, b: usize, c: usize, d: usize| ((a * rd + b) * rd + c) * rd + d;
        for i in 0..rd {
            for j in 0..rd {
                let e = &block[i * rd + j];
                for a in 0..rd {
                    for b in a..rd {
                        let v = e.d2(a, b);
                        d2[i4(a, b, i, j)] = v;
                        d2[i4(b, a, i, j)] = v;
                    }
                }
            }
        }
        let mut inner = vec![T::zero(); rd];
        for m in 0..rd {
            for i in 0..rd {
                for j in 0..rd {
                    for (l, slot) in inner.iter_mut().enumerate() {
                        let dlower = half
                            * (d2[i4(m, i, j, l)] + d2[i4(m, j, i, l)] - d2[i4(m, l, i, j)]);
                        let mut corr = T::zero();
                        for a in 0..rd {
                            corr += dg[idx3(m, l, a)] * gamma[idx3(a, i, j)];
                        }
                        *slot = dlower - corr;
                    }
                    for k in 0..rd {
                        let mut acc = T::zero();
                        for (l, v) in inner.iter().enumerate() {
                            acc += ginv[(k, l)] * *v;
                        }
                        out[((m * dim + k) * dim + i) * dim + j] = acc;
                    }
                }
            }
        }
        Some(out)
    } else {
        None
    };

    Ok(Connection {
        dim,
        metric: g,
        metric_d: dg,
        gamma,
        dgamma,
    })
}

pub fn christoffel_at<T: Real, M: MetricModel<T>>(
    model: &M,
    p: &ProductPoint<T>,
) -> Result<Connection<T>> {
    connection_at(model, p, false)
}

/// Riemann tensor `R^l_{kij}` with `R(∂_i, ∂_j)∂_k = R^l_{kij} ∂_l` and
/// `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`.
#[derive(Clone, Debug)]
pub struct Riemann<T> {
    dim: usize,
    r: Vec<T>,
}

impl<T: Real> Riemann<T> {
    pub fn from_connection(conn: &Connection<T>) -> Self {
        assert!(conn.has_derivatives(), "curvature needs Γ derivatives");
        let d = conn.dim();
        let mut r = vec![T::zero(); d * d * d * d];
        for l in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut v = conn.dgamma(i, l, j, k) - conn.dgamma(j, l, i, k);
                        for m in 0..d {
                            v += conn.gamma(l, i, m) * conn.gamma(m, j, k)
                                - conn.gamma(l, j, m) * conn.gamma(m, i, k);
                        }
                        r[((l * d + k) * d + i) * d + j] = v;
                    }
                }
            }
        }
        Riemann { dim: d, r }
    }

    /// `R(U, V)W`.
    pub fn apply(&self, u: &[T], v: &[T], w: &[T]) -> Vec<T> {
        let d = self.dim;
        (0..d)
            .map(|l| {
                let mut acc = T::zero();
                for k in 0..d {
                    if w[k] == T::zero() {
                        continue;
                    }
                    for i in 0..d {
                        if u[i] == T::zero() {
                            continue;
                        }
                        for j in 0..d {
                            acc += self.r[((l * d + k) * d + i) * d + j] * u[i] * v[j] * w[k];
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

/// `R(U,V)W` from the coordinate formula on `Γ` and `∂Γ`.
pub fn curvature_numeric<T: Real, M: MetricModel<T>>(
    model: &M,
    p: &ProductPoint<T>,
    u: &TangentVec<T>,
    v: &TangentVec<T>,
    w: &TangentVec<T>,
) -> Result<TangentVec<T>> {
    let conn = connection_at(model, p, true)?;
    Ok(TangentVec(Riemann::from_connection(&conn).apply(&u.0, &v.0, &w.0)))
}

/// Closed-form curvature of a cosymplectic space form with the metric `g`.
pub fn curvature_model_with<T: Real>(rho: T, g: &Mat<T>, u: &[T], v: &[T], w: &[T]) -> Vec<T> {
    let dim = g.rows();
    let ip = |a: &[T], b: &[T]| g.bilinear(a, b);
    let eta = |a: &[T]| a[dim - 1];
    let (pu, pv, pw) = (apply_phi(u), apply_phi(v), apply_phi(w));
    let c_u = ip(v, w) - eta(v) * eta(w);
    let c_v = -ip(u, w) + eta(u) * eta(w);
    let c_pv = ip(u, &pw);
    let c_pu = -ip(v, &pw);
    let c_pw = T::lit(2.0) * ip(u, &pv);
    let c_xi = ip(u, w) * eta(v) - ip(v, w) * eta(u);
    let quarter = rho / T::lit(4.0);
    (0..dim)
        .map(|k| {
            let xi_k = if k == dim - 1 { T::one() } else { T::zero() };
            quarter
                * (c_u * u[k] + c_v * v[k] + c_pv * pv[k] + c_pu * pu[k] + c_pw * pw[k]
                    + c_xi * xi_k)
        })
        .collect()
}

pub fn curvature_model<T: Real>(
    spec: &SpaceFormSpec<T>,
    p: &ProductPoint<T>,
    u: &TangentVec<T>,
    v: &TangentVec<T>,
    w: &TangentVec<T>,
) -> Result<TangentVec<T>> {
    let g = metric_at(spec, p)?;
    Ok(TangentVec(curvature_model_with(spec.rho(), &g, &u.0, &v.0, &w.0)))
}

/// Maximum component magnitudes of `∇φ` and `∇ξ` over sampled points and
/// directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParallelismResiduals<T> {
    pub nabla_phi: T,
    pub nabla_xi: T,
}

pub fn parallelism_residuals<T: Real, M: MetricModel<T>>(
    model: &M,
    points: &[ProductPoint<T>],
    directions: &[TangentVec<T>],
) -> Result<ParallelismResiduals<T>> {
    let mut nabla_phi = T::zero();
    let mut nabla_xi = T::zero();
    for p in points {
        let conn = christoffel_at(model, p)?;
        let d = conn.dim();
        let mut xi = vec![T::zero(); d];
        xi[d - 1] = T::one();
        for x in directions {
            // (∇_X ξ) = Γ(X, ξ) since ξ is constant in the chart
            nabla_xi = nabla_xi.max(linalg::max_abs(&conn.apply(&x.0, &xi)));
            // (∇_X φ)Y = Γ(X, φY) − φ Γ(X, Y) for φ constant in the chart
            for j in 0..d {
                let mut y = vec![T::zero(); d];
                y[j] = T::one();
                let a = conn.apply(&x.0, &apply_phi(&y));
                let b = apply_phi(&conn.apply(&x.0, &y));
                nabla_phi = nabla_phi.max(linalg::max_abs(&linalg::sub(&a, &b)));
            }
        }
    }
    Ok(ParallelismResiduals { nabla_phi, nabla_xi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_e(dim: usize, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        v
    }

    #[test]
    fn flat_metric_is_identity() {
        let s = SpaceFormSpec::<f64>::flat(2).unwrap();
        let g = metric_at(&s, &ProductPoint::new(vec![0.3, -0.2, 1.1, 0.5], 0.7)).unwrap();
        assert_eq!(g, Mat::identity(5));
    }

    #[test]
    fn bergman_at_origin_is_identity() {
        let s = SpaceFormSpec::<f64>::complex_hyperbolic(2, -4.0).unwrap();
        let g = metric_at(&s, &ProductPoint::origin(2)).unwrap();
        assert_eq!(g, Mat::identity(5));
    }

    #[test]
    fn product_metric_last_row() {
        let s = SpaceFormSpec::<f64>::complex_projective(3, 2.0).unwrap();
        let g = metric_at(&s, &ProductPoint::new(vec![0.3, 0.1, -0.4, 0.9, 0.2, 0.2], 1.0))
            .unwrap();
        assert_eq!(g.mul_vec(&unit_e(7, 6)), unit_e(7, 6));
    }

    #[test]
    fn domain_errors() {
        let s = SpaceFormSpec::<f64>::complex_hyperbolic(1, -4.0).unwrap();
        let err = metric_at(&s, &ProductPoint::new(vec![0.95, 0.0], 0.0)).unwrap_err();
        assert!(matches!(err, GeomError::OutsideChart { .. }));
        assert!(SpaceFormSpec::<f64>::complex_projective(2, -1.0).is_err());
        assert!(SpaceFormSpec::<f64>::new(Family::Flat, 2, 1.0).is_err());
        assert!(SpaceFormSpec::<f64>::flat(0).is_err());
    }

    #[test]
    fn frame_identities() {
        let s = SpaceFormSpec::<f64>::complex_projective(2, 4.0).unwrap();
        let f = cosymplectic_frame_at(&s, &ProductPoint::new(vec![0.5, -0.3, 0.2, 0.8], 0.0))
            .unwrap();
        assert_eq!(f.phi_of(&f.xi.0), vec![0.0; 5]);
        assert_eq!(f.eta_of(&f.xi.0), 1.0);
        let u = vec![0.1, 0.2, -0.3, 0.4, 0.9];
        assert_eq!(f.eta_of(&u), 0.9);
        let mut h = u.clone();
        h[4] = 0.0;
        let n = linalg::norm(&f.g, &h);
        let h: Vec<f64> = h.iter().map(|x| x / n).collect();
        assert!((linalg::norm(&f.g, &f.phi_of(&h)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_christoffels_vanish() {
        let s = SpaceFormSpec::<f64>::flat(2).unwrap();
        let c = connection_at(&s, &ProductPoint::new(vec![0.3, 0.4, 0.5, 0.6], 0.0), true)
            .unwrap();
        for k in 0..5 {
            for i in 0..5 {
                for j in 0..5 {
                    assert_eq!(c.gamma(k, i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn christoffel_symmetric_and_flat_in_t() {
        let s = SpaceFormSpec::<f64>::complex_projective(2, 4.0).unwrap();
        let c = christoffel_at(&s, &ProductPoint::new(vec![0.5, -0.3, 0.2, 0.8], 0.4)).unwrap();
        for k in 0..5 {
            for i in 0..5 {
                for j in 0..5 {
                    assert_eq!(c.gamma(k, i, j), c.gamma(k, j, i));
                    if k == 4 || i == 4 || j == 4 {
                        assert_eq!(c.gamma(k, i, j), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_model_examples() {
        let s = SpaceFormSpec::<f64>::complex_projective(2, 4.0).unwrap();
        let p = ProductPoint::new(vec![0.5, -0.3, 0.2, 0.8], 0.0);
        let g = metric_at(&s, &p).unwrap();
        let mut u = vec![0.3, 0.1, -0.2, 0.5, 0.0];
        let n = linalg::norm(&g, &u);
        u.iter_mut().for_each(|x| *x /= n);
        let pu = apply_phi(&u);
        let r = curvature_model_with(4.0, &g, &u, &pu, &pu);
        assert!((g.bilinear(&r, &u) - 4.0).abs() < 1e-12);
        let xi = unit_e(5, 4);
        let r = curvature_model_with(4.0, &g, &u, &xi, &xi);
        assert!(linalg::max_abs(&r) < 1e-15);
    }

    #[test]
    fn numeric_matches_model_single_point() {
        let s = SpaceFormSpec::<f64>::complex_hyperbolic(2, -4.0).unwrap();
        let p = ProductPoint::new(vec![0.2, -0.1, 0.4, 0.3], 1.0);
        let u = TangentVec(vec![0.3, 0.1, -0.2, 0.5, 0.7]);
        let v = TangentVec(vec![-0.4, 0.2, 0.6, 0.1, -0.3]);
        let w = TangentVec(vec![0.1, 0.9, 0.0, -0.5, 0.2]);
        let a = curvature_numeric(&s, &p, &u, &v, &w).unwrap();
        let b = curvature_model(&s, &p, &u, &v, &w).unwrap();
        assert!(a.sub(&b).max_abs() < 1e-10, "{a:?} vs {b:?}");
    }

    #[test]
    fn record_roundtrip() {
        let s = SpaceFormSpec::<f64>::complex_hyperbolic(2, -4.0).unwrap();
        let json = serde_json::to_string(&s.record()).unwrap();
        assert_eq!(json, r#"{"family":"CH","n":2,"rho":-4.0}"#);
        let back: SpaceFormRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(SpaceFormSpec::<f64>::from_record(&back).unwrap(), s);
    }
}
