use std::ops::{Add, Div, Mul, Neg, Sub};

use super::real::Real;
use crate::error::{Error, Result};

/// Maximum number of tracked input slots (three space axes plus time).
pub const MAX_SLOTS: usize = 4;

/// Forward-mode second-order jet.
///
/// `d1[i]` holds ∂f/∂xᵢ for the first `slots` inputs and `d2[i]` holds
/// ∂²f/∂xᵢ² for the first `second` of them. Mixed second partials are not
/// tracked. A jet with `slots == 0` is a constant and combines with any other
/// jet.
#[derive(Debug, Clone, Copy)]
pub struct Jet<T> {
    pub value: T,
    pub d1: [T; MAX_SLOTS],
    pub d2: [T; MAX_SLOTS],
    slots: u8,
    second: u8,
}

impl<T: Real> Jet<T> {
    pub fn lift(value: T) -> Self {
        Jet { value, d1: [T::zero(); MAX_SLOTS], d2: [T::zero(); MAX_SLOTS], slots: 0, second: 0 }
    }

    /// Input `slot` of a jet tracking `slots` first partials and `second`
    /// diagonal second partials.
    pub fn variable(value: T, slot: usize, slots: usize, second: usize) -> Self {
        assert!(slot < slots && slots <= MAX_SLOTS && second <= slots);
        let mut j = Jet::lift(value);
        j.slots = slots as u8;
        j.second = second as u8;
        j.d1[slot] = T::constant(1.0);
        j
    }

    /// Jet with explicit derivative arrays; unused entries must be zero.
    pub fn from_parts(value: T, d1: &[T], d2: &[T]) -> Self {
        assert!(d1.len() <= MAX_SLOTS && d2.len() <= d1.len());
        let mut j = Jet::lift(value);
        j.slots = d1.len() as u8;
        j.second = d2.len() as u8;
        j.d1[..d1.len()].copy_from_slice(d1);
        j.d2[..d2.len()].copy_from_slice(d2);
        j
    }

    pub fn slots(&self) -> usize {
        self.slots as usize
    }

    pub fn second_slots(&self) -> usize {
        self.second as usize
    }

    pub fn is_constant(&self) -> bool {
        self.slots == 0
    }

    /// Σ ∂²f/∂xᵢ² over the tracked second slots.
    pub fn laplacian(&self) -> T {
        T::sum(&self.d2[..self.second as usize])
    }

    fn shape(&self, other: &Self) -> (u8, u8) {
        (self.slots.max(other.slots), self.second.max(other.second))
    }

    /// Applies f with f(v) = f0, f'(v) = f1, f''(v) = f2(f0, f1).
    #[inline]
    fn chain(self, f0: T, f1: T, f2: impl FnOnce(T, T) -> T) -> Self {
        let mut out = Jet { value: f0, ..Jet::lift(f0) };
        out.slots = self.slots;
        out.second = self.second;
        for i in 0..self.slots as usize {
            out.d1[i] = f1 * self.d1[i];
        }
        if self.second > 0 {
            let g = f2(f0, f1);
            for i in 0..self.second as usize {
                out.d2[i] = g * self.d1[i].square() + f1 * self.d2[i];
            }
        }
        out
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (n, s) = self.shape(&rhs);
        let mut out = Jet::lift(self.value + rhs.value);
        out.slots = n;
        out.second = s;
        for i in 0..n as usize {
            out.d1[i] = self.d1[i] + rhs.d1[i];
        }
        for i in 0..s as usize {
            out.d2[i] = self.d2[i] + rhs.d2[i];
        }
        out
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let (n, s) = self.shape(&rhs);
        let mut out = Jet::lift(self.value - rhs.value);
        out.slots = n;
        out.second = s;
        for i in 0..n as usize {
            out.d1[i] = self.d1[i] - rhs.d1[i];
        }
        for i in 0..s as usize {
            out.d2[i] = self.d2[i] - rhs.d2[i];
        }
        out
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if rhs.is_constant() {
            return self.scale(rhs.value);
        }
        if self.is_constant() {
            return rhs.scale(self.value);
        }
        let (n, s) = self.shape(&rhs);
        let (a, b) = (self.value, rhs.value);
        let mut out = Jet::lift(a * b);
        out.slots = n;
        out.second = s;
        for i in 0..n as usize {
            out.d1[i] = self.d1[i] * b + a * rhs.d1[i];
        }
        for i in 0..s as usize {
            out.d2[i] = self.d2[i] * b + self.d1[i] * rhs.d1[i] * 2.0 + a * rhs.d2[i];
        }
        out
    }
}

impl<T: Real> Jet<T> {
    /// Multiplies by a scalar of the underlying type.
    pub fn scale(self, c: T) -> Self {
        let mut out = self;
        out.value = self.value * c;
        for i in 0..self.slots as usize {
            out.d1[i] = self.d1[i] * c;
        }
        for i in 0..self.second as usize {
            out.d2[i] = self.d2[i] * c;
        }
        out
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        if rhs.is_constant() {
            return self.scale(rhs.value.recip());
        }
        self * rhs.recip()
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(T::constant(-1.0))
    }
}

impl<T: Real> Add<f64> for Jet<T> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Jet { value: self.value + c, ..self }
    }
}

impl<T: Real> Sub<f64> for Jet<T> {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Jet { value: self.value - c, ..self }
    }
}

impl<T: Real> Mul<f64> for Jet<T> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        self.scale(T::constant(c))
    }
}

impl<T: Real> Div<f64> for Jet<T> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        self.scale(T::constant(1.0 / c))
    }
}

impl<T: Real> Real for Jet<T> {
    fn constant(value: f64) -> Self {
        Jet::lift(T::constant(value))
    }

    fn value(&self) -> f64 {
        self.value.value()
    }

    fn tanh(self) -> Self {
        let y = self.value.tanh();
        let d = (y * y - 1.0) * -1.0;
        self.chain(y, d, |y, d| y * d * -2.0)
    }

    fn exp(self) -> Self {
        let y = self.value.exp();
        self.chain(y, y, |y, _| y)
    }

    fn ln(self) -> Self {
        let r = self.value.recip();
        self.chain(self.value.ln(), r, |_, r| -(r * r))
    }

    fn sqrt(self) -> Self {
        let y = self.value.sqrt();
        let d = y.recip() * 0.5;
        let v = self.value;
        self.chain(y, d, |_, d| -(d / v) * 0.5)
    }

    fn sin(self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s, c, |s, _| -s)
    }

    fn cos(self) -> Self {
        let (c, s) = (self.value.cos(), self.value.sin());
        self.chain(c, -s, |c, _| -c)
    }

    fn recip(self) -> Self {
        let r = self.value.recip();
        let d = -(r * r);
        self.chain(r, d, |r, d| d * r * -2.0)
    }

    fn square(self) -> Self {
        let v = self.value;
        self.chain(v * v, v * 2.0, |_, _| T::constant(2.0))
    }

    fn dot(weights: &[Self], xs: &[Self], bias: Self) -> Self {
        debug_assert_eq!(weights.len(), xs.len());
        let wv: Vec<T> = weights.iter().map(|w| w.value).collect();
        let xv: Vec<T> = xs.iter().map(|x| x.value).collect();
        let mut out = Jet::lift(T::dot(&wv, &xv, bias.value));
        let n = weights.iter().chain(xs).fold(bias.slots, |n, j| n.max(j.slots));
        let s = weights.iter().chain(xs).fold(bias.second, |s, j| s.max(j.second));
        out.slots = n;
        out.second = s;
        let weights_constant = weights.iter().all(|w| w.is_constant());
        for i in 0..n as usize {
            let xd: Vec<T> = xs.iter().map(|x| x.d1[i]).collect();
            out.d1[i] = if weights_constant {
                T::dot(&wv, &xd, bias.d1[i])
            } else {
                let wd: Vec<T> = weights.iter().map(|w| w.d1[i]).collect();
                T::dot(&[wv.as_slice(), wd.as_slice()].concat(), &[xd, xv.clone()].concat(), bias.d1[i])
            };
        }
        for i in 0..s as usize {
            let xd: Vec<T> = xs.iter().map(|x| x.d2[i]).collect();
            out.d2[i] = if weights_constant {
                T::dot(&wv, &xd, bias.d2[i])
            } else {
                let wd2: Vec<T> = weights.iter().map(|w| w.d2[i]).collect();
                let wd1: Vec<T> = weights.iter().map(|w| w.d1[i] * 2.0).collect();
                let xd1: Vec<T> = xs.iter().map(|x| x.d1[i]).collect();
                T::dot(
                    &[wv.as_slice(), wd1.as_slice(), wd2.as_slice()].concat(),
                    &[xd, xd1, xv.clone()].concat(),
                    bias.d2[i],
                )
            };
        }
        out
    }

    fn sum(xs: &[Self]) -> Self {
        let mut out = Jet::lift(T::sum(&xs.iter().map(|x| x.value).collect::<Vec<_>>()));
        out.slots = xs.iter().fold(0, |n, j| n.max(j.slots));
        out.second = xs.iter().fold(0, |s, j| s.max(j.second));
        for i in 0..out.slots as usize {
            out.d1[i] = T::sum(&xs.iter().map(|x| x.d1[i]).collect::<Vec<_>>());
        }
        for i in 0..out.second as usize {
            out.d2[i] = T::sum(&xs.iter().map(|x| x.d2[i]).collect::<Vec<_>>());
        }
        out
    }
}

/// Evaluates `f` on `inputs` after checking that every non-constant input
/// tracks the same slots.
pub fn jet_eval<T: Real, F>(f: F, inputs: &[Jet<T>]) -> Result<Jet<T>>
where
    F: FnOnce(&[Jet<T>]) -> Jet<T>,
{
    let mut shape: Option<(u8, u8)> = None;
    for (k, j) in inputs.iter().enumerate() {
        if j.is_constant() {
            continue;
        }
        match shape {
            None => shape = Some((j.slots, j.second)),
            Some(s) if s != (j.slots, j.second) => {
                return Err(Error::config(
                    format!("jet input {k}"),
                    format!("tracks ({}, {}) slots, expected ({}, {})", j.slots, j.second, s.0, s.1),
                ))
            }
            Some(_) => {}
        }
    }
    Ok(f(inputs))
}
