//! Parameter rectangles, tensor grids and deterministic grid reductions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRect<T> {
    pub u0: T,
    pub u1: T,
    pub v0: T,
    pub v1: T,
}

impl<T: Real> ParamRect<T> {
    pub fn new(u0: T, u1: T, v0: T, v1: T) -> Self {
        ParamRect { u0, u1, v0, v1 }
    }

    pub fn contains(&self, u: T, v: T) -> bool {
        u >= self.u0 && u <= self.u1 && v >= self.v0 && v <= self.v1
    }
}

/// `nu × nv` nodes spanning a rectangle, endpoints included. Node `(i, j)`
/// sits at `(u0 + i·hu, v0 + j·hv)` and is stored at `i·nv + j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    pub rect: ParamRect<T>,
    pub nu: usize,
    pub nv: usize,
}

/// Nodes lost to each side by the five-point stencils.
pub const STENCIL_MARGIN: usize = 2;

/// Smallest number of stencil-interior nodes per axis.
pub const MIN_INTERIOR: usize = 16;

impl<T: Real> Grid<T> {
    pub fn new(rect: ParamRect<T>, nu: usize, nv: usize) -> Self {
        assert!(nu >= 2 && nv >= 2, "grid needs at least two nodes per axis");
        Grid { rect, nu, nv }
    }

    pub fn square(rect: ParamRect<T>, n: usize) -> Self {
        Self::new(rect, n, n)
    }

    pub fn hu(&self) -> T {
        (self.rect.u1 - self.rect.u0) / T::from_usize_lossy(self.nu - 1)
    }

    pub fn hv(&self) -> T {
        (self.rect.v1 - self.rect.v0) / T::from_usize_lossy(self.nv - 1)
    }

    pub fn u(&self, i: usize) -> T {
        self.rect.u0 + T::from_usize_lossy(i) * self.hu()
    }

    pub fn v(&self, j: usize) -> T {
        self.rect.v0 + T::from_usize_lossy(j) * self.hv()
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    pub fn node(&self, k: usize) -> (usize, usize) {
        (k / self.nv, k % self.nv)
    }

    pub fn point(&self, k: usize) -> (T, T) {
        let (i, j) = self.node(k);
        (self.u(i), self.v(j))
    }

    /// Evaluates `f` at every node in parallel; output is in node order.
    pub fn map<R, F>(&self, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(T, T) -> R + Sync + Send,
    {
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                let (u, v) = self.point(k);
                f(u, v)
            })
            .collect()
    }

    /// Errors unless each axis keeps at least [`MIN_INTERIOR`] nodes away from
    /// the stencil margin.
    pub fn require_interior(&self) -> Result<()> {
        let interior = self.nu.min(self.nv).saturating_sub(2 * STENCIL_MARGIN);
        if interior < MIN_INTERIOR {
            return Err(GeomError::GridTooCoarse { interior });
        }
        Ok(())
    }

    /// Stencil-interior node indices in node order.
    pub fn interior_nodes(&self) -> Vec<(usize, usize)> {
        let m = STENCIL_MARGIN;
        let mut out = Vec::new();
        for i in m..self.nu.saturating_sub(m) {
            for j in m..self.nv.saturating_sub(m) {
                out.push((i, j));
            }
        }
        out
    }

    /// The five values `f[i-2..=i+2, j]`.
    pub fn along_u<V: Copy>(&self, f: &[V], i: usize, j: usize) -> [V; 5] {
        std::array::from_fn(|k| f[self.index(i + k - 2, j)])
    }

    /// The five values `f[i, j-2..=j+2]`.
    pub fn along_v<V: Copy>(&self, f: &[V], i: usize, j: usize) -> [V; 5] {
        std::array::from_fn(|k| f[self.index(i, j + k - 2)])
    }
}

/// A maximum over grid samples with the location where it was attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extremum<T> {
    pub value: T,
    pub at: Option<[T; 2]>,
}

impl<T: Real> Extremum<T> {
    pub fn zero() -> Self {
        Extremum {
            value: T::zero(),
            at: None,
        }
    }

    /// Keeps the first strictly larger value; NaN wins and sticks, so a broken
    /// sample can never pass as small.
    pub fn update(&mut self, value: T, at: [T; 2]) {
        if self.value.is_nan() {
            return;
        }
        if value.is_nan() || value > self.value {
            self.value = value;
            self.at = Some(at);
        }
    }

    pub fn merge(mut self, other: Extremum<T>) -> Self {
        if let Some(at) = other.at {
            self.update(other.value, at);
        }
        self
    }
}

impl<T: Real> Default for Extremum<T> {
    fn default() -> Self {
        Extremum::zero()
    }
}

/// Sequential reduction in traversal order.
pub fn max_with_argmax<T: Real, I>(samples: I) -> Extremum<T>
where
    I: IntoIterator<Item = (T, [T; 2])>,
{
    let mut e = Extremum::zero();
    for (v, at) in samples {
        e.update(v, at);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_coordinates() {
        let g = Grid::new(ParamRect::new(0.0, 1.0, -1.0, 1.0), 11, 5);
        assert_eq!(g.u(10), 1.0);
        assert_eq!(g.v(0), -1.0);
        assert_eq!(g.point(g.index(3, 2)), (g.u(3), 0.0));
    }

    #[test]
    fn parallel_map_is_ordered() {
        let g = Grid::square(ParamRect::new(0.0, 1.0, 0.0, 1.0), 20);
        let out = g.map(|u, v| u + 10.0 * v);
        for k in 0..g.len() {
            let (u, v) = g.point(k);
            assert_eq!(out[k], u + 10.0 * v);
        }
    }

    #[test]
    fn coarse_grids_refused() {
        let r = ParamRect::new(0.0, 1.0, 0.0, 1.0);
        assert!(Grid::square(r, 19).require_interior().is_err());
        assert!(Grid::square(r, 20).require_interior().is_ok());
    }

    #[test]
    fn argmax_first_wins_and_nan_sticks() {
        let e = max_with_argmax(vec![(1.0, [0.0, 0.0]), (3.0, [1.0, 0.0]), (3.0, [2.0, 0.0])]);
        assert_eq!(e.at, Some([1.0, 0.0]));
        let e = max_with_argmax(vec![(f64::NAN, [0.0, 0.0]), (3.0, [1.0, 0.0])]);
        assert!(e.value.is_nan());
    }
}
