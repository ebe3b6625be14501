//! The quadratic forms
//!
//! ```text
//! Q(X,Y)  = 8|H|²⟨σ(X,Y),H⟩ − ρ|H|² η(X)η(Y) + 3ρ ⟨φX,H⟩⟨φY,H⟩
//! Q′(X,Y) = 8⟨σ(X,Y),H⟩ − ρ η(X)η(Y)
//! ```
//!
//! evaluated on `Z = (∂u − i∂v)/√2` by complex-bilinear extension, and the
//! `∂̄` residual `Ẑ(Q(Z,Z))` measured with grid stencils.

use std::fmt::Write as _;

use num_complex::Complex;

use crate::calculus::fd::stencil_first;
use crate::error::{GeomError, Result};
use crate::grid::{max_with_argmax, Extremum, Grid};
use crate::scalar::Real;
use crate::spaces::{apply_phi, SpaceFormSpec};
use crate::surface::{geometry_at, Immersion, SurfaceGeometry};

/// Relative isothermality tolerance `|E − G| + |F| < tol·E`.
pub const ISOTHERMAL_TOL: f64 = 1e-7;

/// `Z = re + i·im` and `Ẑ = re − i·im` as real chart vectors.
#[derive(Clone, Debug)]
pub struct IsothermalFrame<T> {
    pub lambda2: T,
    pub z_re: Vec<T>,
    pub z_im: Vec<T>,
}

impl<T: Real> IsothermalFrame<T> {
    pub fn from_geometry(g: &SurfaceGeometry<T>) -> Result<Self> {
        let ff = g.first_form;
        let defect = (ff.e - ff.g).abs() + ff.f.abs();
        if !(defect < T::lit(ISOTHERMAL_TOL) * ff.e) {
            return Err(GeomError::NotIsothermal {
                u: g.u.to_f64().unwrap_or(f64::NAN),
                v: g.v.to_f64().unwrap_or(f64::NAN),
                defect: defect.to_f64().unwrap_or(f64::NAN),
            });
        }
        let r = T::FRAC_1_SQRT_2();
        Ok(IsothermalFrame {
            lambda2: g.lambda2,
            z_re: g.fu.iter().map(|x| *x * r).collect(),
            z_im: g.fv.iter().map(|x| -*x * r).collect(),
        })
    }

    /// Complex-bilinear `⟨Z, Z⟩`.
    pub fn z_z(&self, g: &SurfaceGeometry<T>) -> Complex<T> {
        let (a, b) = (&self.z_re, &self.z_im);
        Complex::new(g.inner(a, a) - g.inner(b, b), T::lit(2.0) * g.inner(a, b))
    }

    /// Complex-bilinear `⟨Z, Ẑ⟩`.
    pub fn z_zbar(&self, g: &SurfaceGeometry<T>) -> Complex<T> {
        let (a, b) = (&self.z_re, &self.z_im);
        Complex::new(g.inner(a, a) + g.inner(b, b), T::zero())
    }
}

pub fn isothermal_frame<T, I>(spec: &SpaceFormSpec<T>, imm: &I, u: T, v: T) -> Result<IsothermalFrame<T>>
where
    T: Real,
    I: Immersion<T> + ?Sized,
{
    IsothermalFrame::from_geometry(&geometry_at(spec, imm, u, v)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QValue<T> {
    pub q: Complex<T>,
    pub qprime: Complex<T>,
    pub at: [T; 2],
    pub lambda2: T,
    pub h_norm: T,
}

impl<T: Real> QValue<T> {
    /// `λ⁴·max(|H|⁴, 1)`, the scale residuals are normalized by.
    pub fn scale(&self) -> T {
        self.lambda2 * self.lambda2 * self.h_norm.powi(4).max(T::one())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Q,
    QPrime,
}

impl Which {
    pub fn pick<T: Copy>(self, v: &QValue<T>) -> Complex<T> {
        match self {
            Which::Q => v.q,
            Which::QPrime => v.qprime,
        }
    }
}

/// `B(Z, Z) = ½(B_uu − B_vv − 2i B_uv)` for a symmetric bilinear form given
/// on the coordinate basis.
fn on_z<T: Real>(buu: T, buv: T, bvv: T) -> Complex<T> {
    let half = T::lit(0.5);
    Complex::new(half * (buu - bvv), -buv)
}

pub fn q_value_from<T: Real>(spec: &SpaceFormSpec<T>, g: &SurfaceGeometry<T>) -> Result<QValue<T>> {
    IsothermalFrame::from_geometry(g)?;
    let rho = spec.rho();
    let h = &g.h;
    let h2 = g.inner(h, h);
    let last = g.dim() - 1;
    let f = [&g.fu, &g.fv];
    let eta = [f[0][last], f[1][last]];
    let phi_h = [g.inner(&apply_phi(f[0]), h), g.inner(&apply_phi(f[1]), h)];
    let sig_h = |a: usize, b: usize| g.inner(&g.sigma_param[a][b], h);
    let eight = T::lit(8.0);
    let three = T::lit(3.0);
    let q = |a: usize, b: usize| {
        eight * h2 * sig_h(a, b) - rho * h2 * eta[a] * eta[b] + three * rho * phi_h[a] * phi_h[b]
    };
    let qp = |a: usize, b: usize| eight * sig_h(a, b) - rho * eta[a] * eta[b];
    Ok(QValue {
        q: on_z(q(0, 0), q(0, 1), q(1, 1)),
        qprime: on_z(qp(0, 0), qp(0, 1), qp(1, 1)),
        at: [g.u, g.v],
        lambda2: g.lambda2,
        h_norm: h2.sqrt(),
    })
}

pub fn q_value<T, I>(spec: &SpaceFormSpec<T>, imm: &I, u: T, v: T) -> Result<QValue<T>>
where
    T: Real,
    I: Immersion<T> + ?Sized,
{
    q_value_from(spec, &geometry_at(spec, imm, u, v)?)
}

/// Raw and normalized `max |Ẑ(Q(Z,Z))|` over the stencil interior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DbarResidual<T> {
    pub raw: Extremum<T>,
    pub normalized: Extremum<T>,
}

/// `Q(Z,Z)` and `Q′(Z,Z)` on every node of a grid.
#[derive(Clone, Debug)]
pub struct QGrid<T> {
    pub grid: Grid<T>,
    pub values: Vec<QValue<T>>,
}

impl<T: Real> QGrid<T> {
    pub fn compute<I>(spec: &SpaceFormSpec<T>, imm: &I, grid: &Grid<T>) -> Result<Self>
    where
        I: Immersion<T> + ?Sized,
    {
        let vals: Vec<Result<QValue<T>>> = grid.map(|u, v| q_value(spec, imm, u, v));
        Ok(QGrid {
            grid: *grid,
            values: vals.into_iter().collect::<Result<_>>()?,
        })
    }

    /// `Ẑf = (∂u f + i ∂v f)/√2` at the interior nodes.
    pub fn dbar_field(&self, which: Which) -> Result<Vec<((usize, usize), Complex<T>)>> {
        let g = &self.grid;
        g.require_interior()?;
        let f: Vec<Complex<T>> = self.values.iter().map(|v| which.pick(v)).collect();
        let re: Vec<T> = f.iter().map(|c| c.re).collect();
        let im: Vec<T> = f.iter().map(|c| c.im).collect();
        let r = T::FRAC_1_SQRT_2();
        Ok(g.interior_nodes()
            .into_iter()
            .map(|(i, j)| {
                let du = Complex::new(
                    stencil_first(g.along_u(&re, i, j), g.hu()),
                    stencil_first(g.along_u(&im, i, j), g.hu()),
                );
                let dv = Complex::new(
                    stencil_first(g.along_v(&re, i, j), g.hv()),
                    stencil_first(g.along_v(&im, i, j), g.hv()),
                );
                ((i, j), (du + dv * Complex::i()) * r)
            })
            .collect())
    }

    pub fn dbar(&self, which: Which) -> Result<DbarResidual<T>> {
        let field = self.dbar_field(which)?;
        let g = &self.grid;
        let raw = max_with_argmax(field.iter().map(|&((i, j), z)| (z.norm(), [g.u(i), g.v(j)])));
        let normalized = max_with_argmax(field.iter().map(|&((i, j), z)| {
            let s = self.values[g.index(i, j)].scale();
            (z.norm() / s, [g.u(i), g.v(j)])
        }));
        Ok(DbarResidual { raw, normalized })
    }

    pub fn max_abs(&self, which: Which) -> Extremum<T> {
        max_with_argmax(self.values.iter().map(|v| (which.pick(v).norm(), v.at)))
    }

    /// `max |Q| / (λ⁴·max(|H|⁴, 1))`.
    pub fn max_abs_normalized(&self, which: Which) -> Extremum<T> {
        max_with_argmax(
            self.values
                .iter()
                .map(|v| (which.pick(v).norm() / v.scale(), v.at)),
        )
    }

    /// `u,v,re_q,im_q,re_qprime,im_qprime,abs_dbar_q,abs_dbar_qprime`; the
    /// `∂̄` columns are empty on the stencil margin.
    pub fn to_csv(&self) -> Result<String> {
        let g = &self.grid;
        let mut dq = vec![None; g.len()];
        let mut dqp = vec![None; g.len()];
        for ((i, j), z) in self.dbar_field(Which::Q)? {
            dq[g.index(i, j)] = Some(z.norm());
        }
        for ((i, j), z) in self.dbar_field(Which::QPrime)? {
            dqp[g.index(i, j)] = Some(z.norm());
        }
        let opt = |x: Option<T>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        let mut out = String::from("u,v,re_q,im_q,re_qprime,im_qprime,abs_dbar_q,abs_dbar_qprime\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
                v.at[0],
                v.at[1],
                v.q.re,
                v.q.im,
                v.qprime.re,
                v.qprime.im,
                opt(dq[k]),
                opt(dqp[k])
            );
        }
        Ok(out)
    }
}

pub fn dbar_residual<T, I>(
    spec: &SpaceFormSpec<T>,
    imm: &I,
    grid: &Grid<T>,
    which: Which,
) -> Result<DbarResidual<T>>
where
    T: Real,
    I: Immersion<T> + ?Sized,
{
    grid.require_interior()?;
    QGrid::compute(spec, imm, grid)?.dbar(which)
}
