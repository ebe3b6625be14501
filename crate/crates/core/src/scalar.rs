//! Scalar abstractions.
//!
//! [`Real`] is the floating-point type the engine is instantiated with (`f32` or
//! `f64`). [`Analytic`] is the narrower interface the closed-form model formulas
//! are written against, so the same metric or profile expression can be
//! evaluated on plain numbers and on truncated Taylor jets.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point: f32 or f64.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Arithmetic plus the analytic primitives used by the model formulas.
///
/// Implemented by every [`Real`] and by [`crate::calculus::Jet`].
pub trait Analytic<T: Real>:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<T, Output = Self>
    + Sub<T, Output = Self>
    + Mul<T, Output = Self>
    + Div<T, Output = Self>
{
    /// Zeroth-order part.
    fn value(&self) -> T;
    /// A constant carrying the same shape (jet layout) as `self`.
    fn constant_like(&self, c: T) -> Self;

    fn sqrt(&self) -> Self;
    fn recip(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;

    fn tan(&self) -> Self {
        self.sin() / self.cos()
    }

    fn tanh(&self) -> Self {
        self.sinh() / self.cosh()
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn zero_like(&self) -> Self {
        self.constant_like(T::zero())
    }

    /// True when every coefficient is finite.
    fn is_finite(&self) -> bool;
}

impl<T: Real> Analytic<T> for T {
    #[inline]
    fn value(&self) -> T {
        *self
    }
    #[inline]
    fn constant_like(&self, c: T) -> Self {
        c
    }
    #[inline]
    fn sqrt(&self) -> Self {
        Float::sqrt(*self)
    }
    #[inline]
    fn recip(&self) -> Self {
        Float::recip(*self)
    }
    #[inline]
    fn exp(&self) -> Self {
        Float::exp(*self)
    }
    #[inline]
    fn ln(&self) -> Self {
        Float::ln(*self)
    }
    #[inline]
    fn sin(&self) -> Self {
        Float::sin(*self)
    }
    #[inline]
    fn cos(&self) -> Self {
        Float::cos(*self)
    }
    #[inline]
    fn sinh(&self) -> Self {
        Float::sinh(*self)
    }
    #[inline]
    fn cosh(&self) -> Self {
        Float::cosh(*self)
    }
    #[inline]
    fn tan(&self) -> Self {
        Float::tan(*self)
    }
    #[inline]
    fn tanh(&self) -> Self {
        Float::tanh(*self)
    }
    #[inline]
    fn is_finite(&self) -> bool {
        Float::is_finite(*self)
    }
}
