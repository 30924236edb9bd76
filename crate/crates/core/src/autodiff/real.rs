use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar type that the network and residual code is generic over.
///
/// Implemented by `f64` (plain evaluation), [`Var`](super::Var) (reverse mode)
/// and [`Jet`](super::Jet) (forward mode).
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(value: f64) -> Self;
    fn value(&self) -> f64;

    fn tanh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;

    /// `bias + Σ weights[i] * xs[i]`.
    fn dot(weights: &[Self], xs: &[Self], bias: Self) -> Self;

    fn sum(xs: &[Self]) -> Self {
        Self::dot(&vec![Self::constant(1.0); xs.len()], xs, Self::constant(0.0))
    }

    fn square(self) -> Self {
        self * self
    }

    fn recip(self) -> Self {
        Self::constant(1.0) / self
    }

    fn zero() -> Self {
        Self::constant(0.0)
    }
}

/// tanh without overflow for large |x|.
pub fn stable_tanh(x: f64) -> f64 {
    let e = (-2.0 * x.abs()).exp_m1();
    (-e / (2.0 + e)).copysign(x)
}

impl Real for f64 {
    #[inline]
    fn constant(value: f64) -> Self {
        value
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn tanh(self) -> Self {
        stable_tanh(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn dot(weights: &[Self], xs: &[Self], bias: Self) -> Self {
        debug_assert_eq!(weights.len(), xs.len());
        weights.iter().zip(xs).fold(bias, |acc, (w, x)| acc + w * x)
    }
    #[inline]
    fn sum(xs: &[Self]) -> Self {
        xs.iter().sum()
    }
}
