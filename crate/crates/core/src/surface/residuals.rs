use crate::calculus::fd::stencil_second;
use crate::error::Result;
use crate::grid::{max_with_argmax, Extremum, Grid};
use crate::scalar::Real;
use crate::spaces::{connection_at, MetricModel, Riemann};

use super::{geometry_at, geometry_with_derivatives, Immersion, SurfaceGeometry};

/// Evaluates `f` on every node and reduces in node order; the first error
/// in node order wins.
fn sweep<T, F>(grid: &Grid<T>, f: F) -> Result<Extremum<T>>
where
    T: Real,
    F: Fn(T, T) -> Result<T> + Sync + Send,
{
    let values: Vec<Result<T>> = grid.map(|u, v| f(u, v));
    let mut samples = Vec::with_capacity(values.len());
    for (k, r) in values.into_iter().enumerate() {
        let (u, v) = grid.point(k);
        samples.push((r?, [u, v]));
    }
    Ok(max_with_argmax(samples))
}

/// `max |∇^⊥_X H|` over the grid and unit tangent `X`.
pub fn pmc_residual<T, M, I>(model: &M, imm: &I, grid: &Grid<T>) -> Result<Extremum<T>>
where
    T: Real,
    M: MetricModel<T>,
    I: Immersion<T> + ?Sized,
{
    sweep(grid, |u, v| {
        Ok(geometry_with_derivatives(model, imm, u, v)?.pmc_norm())
    })
}

/// `max ‖A_H − |H|² Id‖_F`.
pub fn pseudo_umbilical_residual<T, M, I>(model: &M, imm: &I, grid: &Grid<T>) -> Result<Extremum<T>>
where
    T: Real,
    M: MetricModel<T>,
    I: Immersion<T> + ?Sized,
{
    sweep(grid, |u, v| {
        let g = geometry_at(model, imm, u, v)?;
        let a = g.shape_operator(&g.h)?;
        let h2 = g.inner(&g.h, &g.h);
        let d0 = a[0][0] - h2;
        let d1 = a[1][1] - h2;
        Ok((d0 * d0 + d1 * d1 + T::lit(2.0) * a[0][1] * a[0][1]).sqrt())
    })
}

/// `max |⟨φX, Y⟩|` over orthonormal tangent pairs, which is `|⟨φe₁, e₂⟩|`.
pub fn anti_invariance_residual<T, M, I>(model: &M, imm: &I, grid: &Grid<T>) -> Result<Extremum<T>>
where
    T: Real,
    M: MetricModel<T>,
    I: Immersion<T> + ?Sized,
{
    sweep(grid, |u, v| {
        let g = geometry_at(model, imm, u, v)?;
        Ok(g.inner(&g.phi(&g.e1), &g.e2).abs())
    })
}

/// `max |⟨A_H eᵢ, eⱼ⟩ − ⟨σ(eᵢ, eⱼ), H⟩|` with `A_H` from the Weingarten
/// equation `∇^N_X H = −A_H X + ∇^⊥_X H`.
pub fn weingarten_residual<T, M, I>(model: &M, imm: &I, grid: &Grid<T>) -> Result<Extremum<T>>
where
    T: Real,
    M: MetricModel<T>,
    I: Immersion<T> + ?Sized,
{
    sweep(grid, |u, v| {
        Ok(geometry_with_derivatives(model, imm, u, v)?.weingarten_defect())
    })
}

/// Gaussian curvature from the Gauss equation:
/// `K = ⟨R(e₁,e₂)e₂,e₁⟩ + ⟨σ₁₁,σ₂₂⟩ − |σ₁₂|²`.
pub fn gauss_curvature<T: Real, M: MetricModel<T>>(model: &M, g: &SurfaceGeometry<T>) -> Result<T> {
    let conn = connection_at(model, &g.point, true)?;
    let r = Riemann::from_connection(&conn);
    let rk = g.inner(&r.apply(&g.e1, &g.e2, &g.e2), &g.e1);
    let s = &g.sigma;
    Ok(rk + g.inner(&s[0][0], &s[1][1]) - g.inner(&s[0][1], &s[0][1]))
}

/// Intrinsic Gaussian curvature of an isothermal parametrization,
/// `K = −Δ₀ ln λ² / (2λ²)`, by fourth-order stencils at the interior nodes.
pub fn gauss_curvature_isothermal_grid<T, M, I>(
    model: &M,
    imm: &I,
    grid: &Grid<T>,
) -> Result<Vec<((usize, usize), T)>>
where
    T: Real,
    M: MetricModel<T>,
    I: Immersion<T> + ?Sized,
{
    grid.require_interior()?;
    let lam: Vec<Result<T>> = grid.map(|u, v| Ok(geometry_at(model, imm, u, v)?.lambda2));
    let lam: Vec<T> = lam.into_iter().collect::<Result<_>>()?;
    let log: Vec<T> = lam.iter().map(|x| x.ln()).collect();
    Ok(grid
        .interior_nodes()
        .into_iter()
        .map(|(i, j)| {
            let lap = stencil_second(grid.along_u(&log, i, j), grid.hu())
                + stencil_second(grid.along_v(&log, i, j), grid.hv());
            let k = -lap / (T::lit(2.0) * lam[grid.index(i, j)]);
            ((i, j), k)
        })
        .collect())
}

