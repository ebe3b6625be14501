//! Small dense linear algebra on the handful of dimensions the engine uses
//! (at most 2n+1 = 7 in practice).

use std::ops::{Index, IndexMut};

use crate::scalar::{Analytic, Real};

/// Row-major square-or-rectangular matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| *a * *b).sum()
            })
            .collect()
    }

    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Bilinear form `xᵀ A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| *a * *b).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Gauss–Jordan inverse with partial pivoting; `None` when singular.
    pub fn inverse(&self) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| {
                a[(i, col)]
                    .abs()
                    .partial_cmp(&a[(j, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            let p = a[(pivot, col)];
            if p.abs() <= T::epsilon() * a.max_abs().max(T::min_positive_value()) {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let scale = p.recip();
            for j in 0..n {
                a[(col, j)] *= scale;
                inv[(col, j)] *= scale;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(i, j)] -= f * ac;
                    inv[(i, j)] -= f * ic;
                }
            }
        }
        Some(inv)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// `⟨x, y⟩_g` for a row-major metric `g` given as a flat slice, generic over
/// analytic scalars.
pub fn inner_a<T: Real, A: Analytic<T>>(g: &[A], x: &[A], y: &[A]) -> A {
    let n = x.len();
    let mut acc = x[0].zero_like();
    for i in 0..n {
        let mut row = x[0].zero_like();
        for j in 0..n {
            row = row + g[i * n + j].clone() * y[j].clone();
        }
        acc = acc + x[i].clone() * row;
    }
    acc
}

pub fn inner<T: Real>(g: &Mat<T>, x: &[T], y: &[T]) -> T {
    g.bilinear(x, y)
}

pub fn norm<T: Real>(g: &Mat<T>, x: &[T]) -> T {
    inner(g, x, x).max(T::zero()).sqrt()
}

pub fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(a, b)| *a * *b).sum()
}

pub fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

pub fn scaled<T: Real>(a: T, x: &[T]) -> Vec<T> {
    x.iter().map(|v| a * *v).collect()
}

pub fn sub<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(a, b)| *a - *b).collect()
}

pub fn add<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(a, b)| *a + *b).collect()
}

pub fn max_abs<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Modified Gram–Schmidt in the metric `g`, in place. Returns `false` if a
/// vector collapses below `tol`.
pub fn gram_schmidt<T: Real>(g: &Mat<T>, vecs: &mut [Vec<T>], tol: T) -> bool {
    for i in 0..vecs.len() {
        for j in 0..i {
            let (head, tail) = vecs.split_at_mut(i);
            let c = inner(g, &tail[0], &head[j]);
            axpy(-c, &head[j], &mut tail[0]);
        }
        let nrm = norm(g, &vecs[i]);
        if nrm <= tol {
            return false;
        }
        for x in vecs[i].iter_mut() {
            *x = *x / nrm;
        }
    }
    true
}

/// Eigenvalues of a symmetric 2×2 matrix `[[a, b], [b, d]]` in ascending order,
/// with the unit eigenvector of each.
pub fn sym2_eigen<T: Real>(a: T, b: T, d: T) -> [(T, [T; 2]); 2] {
    let half = T::lit(0.5);
    let mean = (a + d) * half;
    let rad = (((a - d) * half).powi(2) + b * b).sqrt();
    let (lo, hi) = (mean - rad, mean + rad);
    let vec_for = |lam: T| -> [T; 2] {
        // (A - lam) v = 0
        let (x, y) = if (a - lam).abs() + b.abs() >= (d - lam).abs() + b.abs() {
            (b, lam - a)
        } else {
            (lam - d, b)
        };
        let n = (x * x + y * y).sqrt();
        if n <= T::epsilon() {
            if (a - lam).abs() <= (d - lam).abs() {
                [T::one(), T::zero()]
            } else {
                [T::zero(), T::one()]
            }
        } else {
            [x / n, y / n]
        }
    };
    [(lo, vec_for(lo)), (hi, vec_for(hi))]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = Mat::from_rows(3, 3, vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0_f64]);
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = Mat::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0_f64]);
        assert!(m.inverse().is_none());
    }

    #[test]
    fn eigen_of_diagonal_and_rotated() {
        let [(l0, v0), (l1, v1)] = sym2_eigen(3.0_f64, 0.0, 1.0);
        assert_eq!((l0, l1), (1.0, 3.0));
        assert!((v0[1].abs() - 1.0).abs() < 1e-15);
        assert!((v1[0].abs() - 1.0).abs() < 1e-15);
        let [(l0, v0), _] = sym2_eigen(2.0_f64, 1.0, 2.0);
        assert!((l0 - 1.0).abs() < 1e-15);
        assert!((v0[0] + v0[1]).abs() < 1e-15);
    }

    #[test]
    fn gram_schmidt_orthonormalizes() {
        let g = Mat::from_rows(2, 2, vec![2.0, 0.5, 0.5, 1.0_f64]);
        let mut v = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        assert!(gram_schmidt(&g, &mut v, 1e-12));
        assert!((inner(&g, &v[0], &v[0]) - 1.0).abs() < 1e-14);
        assert!(inner(&g, &v[0], &v[1]).abs() < 1e-14);
    }
}
