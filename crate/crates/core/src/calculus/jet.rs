use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use smallvec::{smallvec, SmallVec};

use crate::error::GeomError;
use crate::scalar::{Analytic, Real};

type Exponents = SmallVec<[u8; 8]>;

/// Monomial bookkeeping for truncated Taylor polynomials in `nvars` variables
/// up to total degree `order`.
///
/// Monomials are graded: index 0 is the constant term and indices
/// `1..=nvars` are the linear terms in variable order.
pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<Exponents>,
    index: HashMap<Exponents, usize>,
    mul: Vec<(u16, u16, u16)>,
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Layout(vars={}, order={})", self.nvars, self.order)
    }
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exps: Vec<Exponents> = Vec::new();
        for degree in 0..=order {
            let mut cur: Exponents = smallvec![0; nvars];
            push_degree(&mut exps, &mut cur, 0, degree);
        }
        let index: HashMap<Exponents, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            let da: usize = a.iter().map(|&x| x as usize).sum();
            for (j, b) in exps.iter().enumerate() {
                let db: usize = b.iter().map(|&x| x as usize).sum();
                if da + db > order {
                    continue;
                }
                let sum: Exponents = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                let k = index[&sum];
                mul.push((i as u16, j as u16, k as u16));
            }
        }
        Layout {
            nvars,
            order,
            exps,
            index,
            mul,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.exps[idx]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

fn push_degree(out: &mut Vec<Exponents>, cur: &mut Exponents, var: usize, remaining: usize) {
    let n = cur.len();
    if n == 0 {
        if remaining == 0 {
            out.push(cur.clone());
        }
        return;
    }
    if var == n - 1 {
        cur[var] = remaining as u8;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[var] = k as u8;
        push_degree(out, cur, var + 1, remaining - k);
    }
    cur[var] = 0;
}

/// Shared, leaked layout for `(nvars, order)`.
pub fn layout(nvars: usize, order: usize) -> &'static Layout {
    static CACHE: OnceLock<Mutex<Vec<&'static Layout>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().expect("layout cache poisoned");
    if let Some(l) = guard
        .iter()
        .find(|l| l.nvars == nvars && l.order == order)
    {
        return l;
    }
    let leaked: &'static Layout = Box::leak(Box::new(Layout::build(nvars, order)));
    guard.push(leaked);
    leaked
}

fn factorial<T: Real>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * T::from_usize_lossy(i))
}

/// Truncated multivariate Taylor polynomial.
///
/// Stores Taylor coefficients `c_α = ∂^α f / α!`, so mixed partials are a
/// single stored number and agree bit for bit whatever order they are
/// requested in.
#[derive(Clone)]
pub struct Jet<T> {
    layout: &'static Layout,
    c: SmallVec<[T; 10]>,
}

impl<T: Real> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("vars", &self.layout.nvars)
            .field("order", &self.layout.order)
            .field("coeffs", &self.c.as_slice())
            .finish()
    }
}

impl<T: Real> PartialEq for Jet<T> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.layout, other.layout) && self.c == other.c
    }
}

impl<T: Real> Jet<T> {
    pub fn constant(layout: &'static Layout, value: T) -> Self {
        let mut c: SmallVec<[T; 10]> = smallvec![T::zero(); layout.len()];
        c[0] = value;
        Jet { layout, c }
    }

    /// The coordinate function `x_var` expanded about `value`.
    pub fn variable(layout: &'static Layout, value: T, var: usize) -> Self {
        assert!(var < layout.nvars, "variable index out of range");
        let mut j = Self::constant(layout, value);
        if layout.order >= 1 {
            j.c[1 + var] = T::one();
        }
        j
    }

    pub fn from_coeffs(layout: &'static Layout, coeffs: &[T]) -> Self {
        assert_eq!(coeffs.len(), layout.len());
        Jet {
            layout,
            c: coeffs.iter().copied().collect(),
        }
    }

    pub fn layout(&self) -> &'static Layout {
        self.layout
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.c
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    /// Taylor coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exps: &[u8]) -> T {
        self.layout
            .index_of(exps)
            .map(|i| self.c[i])
            .unwrap_or_else(T::zero)
    }

    /// Partial derivative `∂^α f` at the expansion point.
    pub fn derivative(&self, exps: &[u8]) -> T {
        let scale = exps
            .iter()
            .fold(T::one(), |acc, &e| acc * factorial::<T>(e as usize));
        self.coeff(exps) * scale
    }

    /// First partial with respect to `var`.
    pub fn d1(&self, var: usize) -> T {
        if self.layout.order == 0 {
            return T::zero();
        }
        self.c[1 + var]
    }

    /// Second partial `∂_i ∂_j`.
    pub fn d2(&self, i: usize, j: usize) -> T {
        let mut e: Exponents = smallvec![0; self.layout.nvars];
        e[i] += 1;
        e[j] += 1;
        self.derivative(&e)
    }

    /// Exact partial derivative as a jet of one order less.
    pub fn partial(&self, var: usize) -> Jet<T> {
        assert!(self.layout.order >= 1, "cannot differentiate an order-0 jet");
        let lower = layout(self.layout.nvars, self.layout.order - 1);
        let mut out = Jet::constant(lower, T::zero());
        for (k, e) in lower.exps.iter().enumerate() {
            let mut up = e.clone();
            up[var] += 1;
            let idx = self.layout.index[&up];
            out.c[k] = self.c[idx] * T::from_usize_lossy(up[var] as usize);
        }
        out
    }

    /// Drops every monomial above `order`.
    pub fn truncate(&self, order: usize) -> Jet<T> {
        assert!(order <= self.layout.order);
        let lower = layout(self.layout.nvars, order);
        Jet {
            layout: lower,
            c: self.c[..lower.len()].iter().copied().collect(),
        }
    }

    /// Re-expresses a jet in `nvars_src` variables as a jet in `target`
    /// variables, mapping source variable `i` onto target variable `map[i]`.
    pub fn embed(&self, target: &'static Layout, map: &[usize]) -> Jet<T> {
        assert_eq!(map.len(), self.layout.nvars);
        let mut out = Jet::constant(target, T::zero());
        for (i, e) in self.layout.exps.iter().enumerate() {
            let deg: usize = e.iter().map(|&x| x as usize).sum();
            if deg > target.order {
                continue;
            }
            let mut te: Exponents = smallvec![0; target.nvars];
            for (src, &dst) in map.iter().enumerate() {
                te[dst] += e[src];
            }
            let k = target.index[&te];
            out.c[k] += self.c[i];
        }
        out
    }

    /// Antiderivative of a univariate jet with zero constant term; the top
    /// coefficient falls off the truncation.
    pub fn integrate_univariate(&self) -> Jet<T> {
        assert_eq!(self.layout.nvars, 1, "integration is univariate only");
        let mut out = Jet::constant(self.layout, T::zero());
        for k in 1..self.c.len() {
            out.c[k] = self.c[k - 1] / T::from_usize_lossy(k);
        }
        out
    }

    /// Evaluates `f(self)` given `f^(k)` at the expansion point for
    /// `k = 0..=order`.
    pub fn compose(&self, derivs: &[T]) -> Jet<T> {
        let order = self.layout.order;
        assert!(derivs.len() > order);
        let mut h = self.clone();
        h.c[0] = T::zero();
        let mut acc = Jet::constant(self.layout, derivs[order] / factorial::<T>(order));
        for k in (0..order).rev() {
            acc = acc * h.clone();
            acc.c[0] += derivs[k] / factorial::<T>(k);
        }
        acc
    }

    pub fn checked_recip(&self) -> Result<Jet<T>, GeomError> {
        if self.c[0] == T::zero() {
            return Err(GeomError::NonAnalytic(
                "division by a jet with zero value".into(),
            ));
        }
        Ok(Analytic::recip(self))
    }

    pub fn checked_div(&self, rhs: &Jet<T>) -> Result<Jet<T>, GeomError> {
        Ok(self.clone() * rhs.checked_recip()?)
    }

    fn same_layout(&self, other: &Self) {
        assert!(
            std::ptr::eq(self.layout, other.layout),
            "jet layout mismatch: {:?} vs {:?}",
            self.layout,
            other.layout
        );
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(mut self, rhs: Jet<T>) -> Jet<T> {
        self.same_layout(&rhs);
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += *b;
        }
        self
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(mut self, rhs: Jet<T>) -> Jet<T> {
        self.same_layout(&rhs);
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= *b;
        }
        self
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Jet<T>) -> Jet<T> {
        self.same_layout(&rhs);
        let mut out = Jet::constant(self.layout, T::zero());
        for &(i, j, k) in &self.layout.mul {
            out.c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        out
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Jet<T>;
    fn div(self, rhs: Jet<T>) -> Jet<T> {
        self * Analytic::recip(&rhs)
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(mut self) -> Jet<T> {
        for a in self.c.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl<T: Real> Add<T> for Jet<T> {
    type Output = Jet<T>;
    fn add(mut self, rhs: T) -> Jet<T> {
        self.c[0] += rhs;
        self
    }
}

impl<T: Real> Sub<T> for Jet<T> {
    type Output = Jet<T>;
    fn sub(mut self, rhs: T) -> Jet<T> {
        self.c[0] -= rhs;
        self
    }
}

impl<T: Real> Mul<T> for Jet<T> {
    type Output = Jet<T>;
    fn mul(mut self, rhs: T) -> Jet<T> {
        for a in self.c.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<T: Real> Div<T> for Jet<T> {
    type Output = Jet<T>;
    fn div(self, rhs: T) -> Jet<T> {
        self * rhs.recip()
    }
}

impl<T: Real> Analytic<T> for Jet<T> {
    fn value(&self) -> T {
        self.c[0]
    }

    fn constant_like(&self, c: T) -> Self {
        Jet::constant(self.layout, c)
    }

    fn sqrt(&self) -> Self {
        let x = self.c[0];
        let half = T::lit(0.5);
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let mut coef = T::one();
        for k in 0..=self.order() {
            let kt = T::from_usize_lossy(k);
            derivs.push(coef * x.powf(half - kt));
            coef *= half - kt;
        }
        self.compose(&derivs)
    }

    fn recip(&self) -> Self {
        let x = self.c[0];
        let derivs: Vec<T> = (0..=self.order())
            .map(|k| {
                let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                sign * factorial::<T>(k) * x.powi(-(k as i32) - 1)
            })
            .collect();
        self.compose(&derivs)
    }

    fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose(&vec![e; self.order() + 1])
    }

    fn ln(&self) -> Self {
        let x = self.c[0];
        let derivs: Vec<T> = (0..=self.order())
            .map(|k| {
                if k == 0 {
                    x.ln()
                } else {
                    let sign = if k % 2 == 1 { T::one() } else { -T::one() };
                    sign * factorial::<T>(k - 1) * x.powi(-(k as i32))
                }
            })
            .collect();
        self.compose(&derivs)
    }

    fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [s, c, -s, -c];
        let derivs: Vec<T> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [c, -s, -c, s];
        let derivs: Vec<T> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    fn sinh(&self) -> Self {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        let derivs: Vec<T> = (0..=self.order())
            .map(|k| if k % 2 == 0 { s } else { c })
            .collect();
        self.compose(&derivs)
    }

    fn cosh(&self) -> Self {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        let derivs: Vec<T> = (0..=self.order())
            .map(|k| if k % 2 == 0 { c } else { s })
            .collect();
        self.compose(&derivs)
    }

    fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }
}
