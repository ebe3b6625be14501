//! Immersed surfaces in `M^n(ρ) × ℝ`: fundamental forms, mean curvature
//! vector, shape operators, normal connection and the residual functionals
//! built on them.

mod angle;
pub mod families;
mod geometry;
mod residuals;

pub use angle::{angle_decomposition, AngleDecomposition};
pub use geometry::{
    geometry_at, geometry_with_derivatives, FirstForm, MeanCurvatureDerivatives,
    SurfaceGeometry, DEGENERACY_TOL,
};
pub use residuals::{
    anti_invariance_residual, gauss_curvature, gauss_curvature_isothermal_grid,
    pmc_residual, pseudo_umbilical_residual, weingarten_residual,
};

use crate::calculus::{jet_eval, AnalyticMap, Jet, MapJet};
use crate::error::Result;
use crate::grid::ParamRect;
use crate::scalar::Real;

/// A parametrized surface `(u, v) ↦ M^n(ρ) × ℝ` that can expand itself in
/// Taylor jets at any parameter point.
pub trait Immersion<T: Real>: Sync {
    fn rect(&self) -> ParamRect<T>;

    /// `2n + 1`.
    fn ambient_dim(&self) -> usize;

    /// Whether the family promises `E = G`, `F = 0`.
    fn isothermal_claimed(&self) -> bool {
        false
    }

    /// Jets of the chart coordinates in `(u, v)` to the requested order.
    fn jet(&self, u: T, v: T, order: usize) -> Result<MapJet<T>>;

    /// Chart coordinates only.
    fn point(&self, u: T, v: T) -> Result<Vec<T>> {
        Ok(self.jet(u, v, 1)?.value())
    }
}

impl<T: Real, I: Immersion<T> + ?Sized> Immersion<T> for &I {
    fn rect(&self) -> ParamRect<T> {
        (**self).rect()
    }
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn isothermal_claimed(&self) -> bool {
        (**self).isothermal_claimed()
    }
    fn jet(&self, u: T, v: T, order: usize) -> Result<MapJet<T>> {
        (**self).jet(u, v, order)
    }
}

impl<T: Real, I: Immersion<T> + ?Sized> Immersion<T> for Box<I> {
    fn rect(&self) -> ParamRect<T> {
        (**self).rect()
    }
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn isothermal_claimed(&self) -> bool {
        (**self).isothermal_claimed()
    }
    fn jet(&self, u: T, v: T, order: usize) -> Result<MapJet<T>> {
        (**self).jet(u, v, order)
    }
}

/// An [`AnalyticMap`] of two parameters viewed as an immersion.
#[derive(Clone, Debug)]
pub struct MapImmersion<T, F> {
    pub map: F,
    pub rect: ParamRect<T>,
    pub isothermal: bool,
}

impl<T: Real, F: AnalyticMap<T> + Sync> Immersion<T> for MapImmersion<T, F> {
    fn rect(&self) -> ParamRect<T> {
        self.rect
    }

    fn ambient_dim(&self) -> usize {
        self.map.target_dim()
    }

    fn isothermal_claimed(&self) -> bool {
        self.isothermal
    }

    fn jet(&self, u: T, v: T, order: usize) -> Result<MapJet<T>> {
        jet_eval(&self.map, &[u, v], order)
    }
}

/// `(u, v) ↦ f(u + du, v + dv)` on the correspondingly shifted rectangle.
#[derive(Clone, Debug)]
pub struct Shifted<I, T> {
    pub inner: I,
    pub du: T,
    pub dv: T,
}

impl<T: Real, I: Immersion<T>> Immersion<T> for Shifted<I, T> {
    fn rect(&self) -> ParamRect<T> {
        let r = self.inner.rect();
        ParamRect::new(r.u0 - self.du, r.u1 - self.du, r.v0 - self.dv, r.v1 - self.dv)
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn isothermal_claimed(&self) -> bool {
        self.inner.isothermal_claimed()
    }

    fn jet(&self, u: T, v: T, order: usize) -> Result<MapJet<T>> {
        self.inner.jet(u + self.du, v + self.dv, order)
    }
}

/// `(u, v) ↦ f(a·u, a·v)` on the rectangle shrunk by `a`.
#[derive(Clone, Debug)]
pub struct Rescaled<I, T> {
    pub inner: I,
    pub a: T,
}

impl<T: Real, I: Immersion<T>> Immersion<T> for Rescaled<I, T> {
    fn rect(&self) -> ParamRect<T> {
        let r = self.inner.rect();
        ParamRect::new(r.u0 / self.a, r.u1 / self.a, r.v0 / self.a, r.v1 / self.a)
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn isothermal_claimed(&self) -> bool {
        self.inner.isothermal_claimed()
    }

    fn jet(&self, u: T, v: T, order: usize) -> Result<MapJet<T>> {
        let j = self.inner.jet(self.a * u, self.a * v, order)?;
        let comps = j
            .into_components()
            .into_iter()
            .map(|mut c| {
                let lay = c.layout();
                for (k, x) in c.coeffs_mut().iter_mut().enumerate() {
                    let deg: i32 = lay.exponents(k).iter().map(|&e| e as i32).sum();
                    *x *= self.a.powi(deg);
                }
                c
            })
            .collect::<Vec<Jet<T>>>();
        Ok(MapJet::new(comps))
    }
}
