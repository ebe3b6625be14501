//! Closed-form surface families.

use crate::calculus::AnalyticMap;
use crate::error::{GeomError, Result};
use crate::grid::ParamRect;
use crate::scalar::{Analytic, Real};

use super::MapImmersion;

/// The complex line `z¹ = c + s(u + iv)`, other coordinates zero, at height
/// `t₀`. Holomorphic, hence isothermal and `φ`-invariant; a projective line
/// in every model, so totally geodesic.
#[derive(Clone, Debug)]
pub struct HolomorphicPlane<T> {
    pub n: usize,
    pub center: [T; 2],
    pub scale: T,
    pub height: T,
}

impl<T: Real> AnalyticMap<T> for HolomorphicPlane<T> {
    fn params(&self) -> usize {
        2
    }

    fn target_dim(&self) -> usize {
        2 * self.n + 1
    }

    fn eval<A: Analytic<T>>(&self, x: &[A]) -> Vec<A> {
        let zero = x[0].zero_like();
        let mut out = vec![zero; 2 * self.n + 1];
        out[0] = x[0].clone() * self.scale + self.center[0];
        out[1] = x[1].clone() * self.scale + self.center[1];
        out[2 * self.n] = x[0].constant_like(self.height);
        out
    }
}

/// The real coordinate plane `x¹ = s·u`, `x² = s·v` at height `t₀`: the
/// totally geodesic real slice of `M²`, not isothermal in these coordinates.
#[derive(Clone, Debug)]
pub struct RealPlane<T> {
    pub n: usize,
    pub scale: T,
    pub height: T,
}

impl<T: Real> AnalyticMap<T> for RealPlane<T> {
    fn params(&self) -> usize {
        2
    }

    fn target_dim(&self) -> usize {
        2 * self.n + 1
    }

    fn eval<A: Analytic<T>>(&self, x: &[A]) -> Vec<A> {
        let zero = x[0].zero_like();
        let mut out = vec![zero; 2 * self.n + 1];
        out[0] = x[0].clone() * self.scale;
        out[2] = x[1].clone() * self.scale;
        out[2 * self.n] = x[0].constant_like(self.height);
        out
    }
}

/// A generic curved patch with no special structure, for cross-checks.
#[derive(Clone, Debug)]
pub struct AnalyticPatch<T> {
    pub n: usize,
    pub scale: T,
    pub amplitude: T,
}

impl<T: Real> AnalyticMap<T> for AnalyticPatch<T> {
    fn params(&self) -> usize {
        2
    }

    fn target_dim(&self) -> usize {
        2 * self.n + 1
    }

    fn eval<A: Analytic<T>>(&self, x: &[A]) -> Vec<A> {
        let (u, v) = (x[0].clone(), x[1].clone());
        let (s, a) = (self.scale, self.amplitude);
        let mut out = vec![u.zero_like(); 2 * self.n + 1];
        out[0] = (u.clone() + v.sin() * a) * s;
        out[1] = (v.clone() + u.clone() / (u.square() + T::one()) * a) * s;
        if self.n >= 2 {
            out[2] = u.clone() * v.clone() * (s * a);
            out[3] = (u.square() - v.square()) * (s * a * T::lit(0.5));
        }
        out[2 * self.n] = (u.sin() + v.cos() * v.clone()) * a;
        out
    }
}

pub fn holomorphic_plane<T: Real>(
    n: usize,
    center: [T; 2],
    scale: T,
    height: T,
    rect: ParamRect<T>,
) -> Result<MapImmersion<T, HolomorphicPlane<T>>> {
    if n == 0 {
        return Err(GeomError::Dimension("n must be at least 1".into()));
    }
    Ok(MapImmersion {
        map: HolomorphicPlane {
            n,
            center,
            scale,
            height,
        },
        rect,
        isothermal: true,
    })
}

pub fn real_plane<T: Real>(
    n: usize,
    scale: T,
    height: T,
    rect: ParamRect<T>,
) -> Result<MapImmersion<T, RealPlane<T>>> {
    if n < 2 {
        return Err(GeomError::Dimension(
            "the real plane needs complex dimension at least 2".into(),
        ));
    }
    Ok(MapImmersion {
        map: RealPlane { n, scale, height },
        rect,
        isothermal: false,
    })
}

pub fn analytic_patch<T: Real>(
    n: usize,
    scale: T,
    amplitude: T,
    rect: ParamRect<T>,
) -> Result<MapImmersion<T, AnalyticPatch<T>>> {
    if n == 0 {
        return Err(GeomError::Dimension("n must be at least 1".into()));
    }
    Ok(MapImmersion {
        map: AnalyticPatch {
            n,
            scale,
            amplitude,
        },
        rect,
        isothermal: false,
    })
}
