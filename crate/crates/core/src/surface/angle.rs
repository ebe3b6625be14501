use crate::error::{GeomError, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::spaces::MetricModel;

use super::{geometry_at, Immersion, SurfaceGeometry};

/// Below this `|ξ^⊤|` the adapted frame is undefined.
pub const MU_UNDEFINED_TOL: f64 = 1e-7;

/// The decomposition `ξ = μ e₂ + ν H/|H|` together with the eigenvalues of
/// `A_{H/|H|}`.
///
/// When `μ` is defined the frame is adapted: `e₂ = ξ^⊤/|ξ^⊤|` and `e₁ ⊥ ξ^⊤`.
/// Otherwise the frame is the Gram–Schmidt one of the geometry and the
/// eigenvalues are in ascending order.
#[derive(Clone, Debug)]
pub struct AngleDecomposition<T> {
    pub mu: Option<T>,
    pub nu: T,
    pub lambda1: T,
    pub lambda2_eig: T,
    /// `⟨A_{H/|H|} e₁, e₂⟩` in the frame below.
    pub off_diagonal: T,
    pub h_norm: T,
    pub e1: Vec<T>,
    pub e2: Vec<T>,
    pub frame_coeffs: [[T; 2]; 2],
}

impl<T: Real> AngleDecomposition<T> {
    pub fn from_geometry(g: &SurfaceGeometry<T>) -> Result<Self> {
        let h_norm = g.h_norm();
        if !(h_norm > T::lit(1e-8)) {
            return Err(GeomError::MinimalPoint(h_norm.to_f64().unwrap_or(f64::NAN)));
        }
        let d = g.dim();
        let mut xi = vec![T::zero(); d];
        xi[d - 1] = T::one();
        let e5 = linalg::scaled(h_norm.recip(), &g.h);
        let nu = g.inner(&xi, &e5);
        let [a, b] = g.frame_components(&xi);
        let m = (a * a + b * b).sqrt();
        let c = g.frame_coeffs;

        let (mu, coeffs) = if m >= T::lit(MU_UNDEFINED_TOL) {
            let (ca, cb) = (a / m, b / m);
            let e1c = [cb * c[0][0] - ca * c[1][0], cb * c[0][1] - ca * c[1][1]];
            let e2c = [ca * c[0][0] + cb * c[1][0], ca * c[0][1] + cb * c[1][1]];
            (Some(m), [e1c, e2c])
        } else {
            (None, c)
        };
        let sig = |x: [T; 2], y: [T; 2]| -> T {
            let mut acc = T::zero();
            for p in 0..2 {
                for q in 0..2 {
                    acc += x[p] * y[q] * g.inner(&g.sigma_param[p][q], &e5);
                }
            }
            acc
        };
        let a11 = sig(coeffs[0], coeffs[0]);
        let a12 = sig(coeffs[0], coeffs[1]);
        let a22 = sig(coeffs[1], coeffs[1]);
        let [(lo, vlo), (hi, _)] = linalg::sym2_eigen(a11, a12, a22);
        let (lambda1, lambda2_eig) = if mu.is_some() && vlo[0].abs() < vlo[1].abs() {
            (hi, lo)
        } else {
            (lo, hi)
        };
        Ok(AngleDecomposition {
            mu,
            nu,
            lambda1,
            lambda2_eig,
            off_diagonal: a12,
            h_norm,
            e1: g.param_vector(coeffs[0]),
            e2: g.param_vector(coeffs[1]),
            frame_coeffs: coeffs,
        })
    }
}

pub fn angle_decomposition<T, M, I>(model: &M, imm: &I, u: T, v: T) -> Result<AngleDecomposition<T>>
where
    T: Real,
    M: MetricModel<T>,
    I: Immersion<T> + ?Sized,
{
    AngleDecomposition::from_geometry(&geometry_at(model, imm, u, v)?)
}
