//! Finite-difference oracles and the fourth-order grid stencils.

use crate::scalar::Real;

/// Default central-difference step.
pub const STEP: f64 = 1e-5;

/// Central first difference of a vector-valued function in parameter `var`.
pub fn central_first<T: Real, F>(f: F, x: &[T], var: usize, h: T) -> Vec<T>
where
    F: Fn(&[T]) -> Vec<T>,
{
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[var] += h;
    xm[var] -= h;
    let (fp, fm) = (f(&xp), f(&xm));
    let two_h = h + h;
    fp.iter().zip(&fm).map(|(a, b)| (*a - *b) / two_h).collect()
}

/// Central second difference `∂_i ∂_j f`.
pub fn central_second<T: Real, F>(f: F, x: &[T], i: usize, j: usize, h: T) -> Vec<T>
where
    F: Fn(&[T]) -> Vec<T>,
{
    if i == j {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let (fp, f0, fm) = (f(&xp), f(x), f(&xm));
        let h2 = h * h;
        return (0..f0.len())
            .map(|k| (fp[k] - f0[k] - f0[k] + fm[k]) / h2)
            .collect();
    }
    let shifted = |si: T, sj: T| {
        let mut y = x.to_vec();
        y[i] += si;
        y[j] += sj;
        f(&y)
    };
    let (pp, pm, mp, mm) = (
        shifted(h, h),
        shifted(h, -h),
        shifted(-h, h),
        shifted(-h, -h),
    );
    let four_h2 = T::lit(4.0) * h * h;
    (0..pp.len())
        .map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / four_h2)
        .collect()
}

/// Fourth-order first derivative from samples at offsets `-2..=2`.
#[inline]
pub fn stencil_first<T: Real>(f: [T; 5], h: T) -> T {
    (-f[4] + T::lit(8.0) * f[3] - T::lit(8.0) * f[1] + f[0]) / (T::lit(12.0) * h)
}

/// Fourth-order second derivative from samples at offsets `-2..=2`.
#[inline]
pub fn stencil_second<T: Real>(f: [T; 5], h: T) -> T {
    (-f[4] + T::lit(16.0) * f[3] - T::lit(30.0) * f[2] + T::lit(16.0) * f[1] - f[0])
        / (T::lit(12.0) * h * h)
}

/// Fourth-order first derivative of evenly spaced samples at index `i`,
/// one-sided near the ends.
pub fn sampled_first<T: Real>(f: &[T], i: usize, h: T) -> T {
    let n = f.len();
    assert!(n >= 5, "need at least five samples");
    let c = |k: f64| T::lit(k);
    if i >= 2 && i + 2 < n {
        stencil_first([f[i - 2], f[i - 1], f[i], f[i + 1], f[i + 2]], h)
    } else if i < 2 {
        let b = i;
        let s: Vec<T> = f[0..5].to_vec();
        // one-sided fourth-order weights for offsets 0..4 evaluated at b
        let w: [[f64; 5]; 2] = [
            [-25.0, 48.0, -36.0, 16.0, -3.0],
            [-3.0, -10.0, 18.0, -6.0, 1.0],
        ];
        w[b].iter()
            .zip(&s)
            .fold(T::zero(), |acc, (wk, sk)| acc + c(*wk) * *sk)
            / (c(12.0) * h)
    } else {
        let b = n - 1 - i;
        let s: Vec<T> = f[n - 5..n].iter().rev().copied().collect();
        let w: [[f64; 5]; 2] = [
            [-25.0, 48.0, -36.0, 16.0, -3.0],
            [-3.0, -10.0, 18.0, -6.0, 1.0],
        ];
        -(w[b].iter()
            .zip(&s)
            .fold(T::zero(), |acc, (wk, sk)| acc + c(*wk) * *sk)
            / (c(12.0) * h))
    }
}
