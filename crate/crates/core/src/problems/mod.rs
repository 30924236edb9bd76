//! Benchmark problems μΔu − u_t = A(u)(1·∇u) + f(x).
//!
//! x₁ ∈ [lo, hi] carries Dirichlet data L (left) and R (right); the remaining
//! coordinates x* are periodic. The reduced problem A(φ)(1·∇φ) + f = 0 is
//! solved along the characteristics x* − x₁ = const, which for linear A gives
//! closed forms for the outer solutions φ⁻ (from the left boundary) and φ⁺
//! (from the right boundary).

mod assumptions;
mod oracle;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::autodiff::{stable_tanh, Real};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

pub use assumptions::{assumption_check, AssumptionReport, Violation};
pub use oracle::{build_front_oracle, FrontOracle, Resolution};

/// Which outer branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

/// Advection coefficient A(u, x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Advection {
    /// A(u) = coeff · u.
    Linear { coeff: f64 },
}

impl Advection {
    pub fn eval<T: Real>(&self, u: T) -> T {
        match *self {
            Advection::Linear { coeff } => u * coeff,
        }
    }

    /// ∂A/∂u.
    pub fn du(&self, _u: f64) -> f64 {
        match *self {
            Advection::Linear { coeff } => coeff,
        }
    }

    /// ∫ₐᵇ A(u) du.
    pub fn integral<T: Real>(&self, a: T, b: T) -> T {
        match *self {
            Advection::Linear { coeff } => (b.square() - a.square()) * (0.5 * coeff),
        }
    }
}

/// Source term f(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    /// Σ cₖ x₁ᵏ (one-dimensional problems only).
    Polynomial { coeffs: Vec<f64> },
    /// Π cos(ω xᵢ) over all coordinates.
    CosProduct { wavenumber: f64 },
}

impl Source {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Source::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x[0] + c),
            Source::CosProduct { wavenumber } => x.iter().map(|&xi| (wavenumber * xi).cos()).product(),
        }
    }

    /// ∂f/∂x₁ for one-dimensional sources.
    pub fn dx1(&self, x1: f64) -> f64 {
        match self {
            Source::Polynomial { coeffs } => {
                coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * x1 + k as f64 * c)
            }
            Source::CosProduct { wavenumber } => -wavenumber * (wavenumber * x1).sin(),
        }
    }

    /// ∫_{a}^{b} f(s, x* + s − x₁) ds along the characteristic through (x₁, x*).
    fn line_integral<T: Real>(&self, x1: T, xstar: &[f64], a: T, b: T) -> T {
        match self {
            Source::Polynomial { coeffs } => {
                let anti = |s: T| {
                    coeffs.iter().enumerate().rev().fold(T::zero(), |acc, (k, c)| acc * s + c / (k as f64 + 1.0)) * s
                };
                anti(b) - anti(a)
            }
            Source::CosProduct { wavenumber } => {
                // Product of cosines as a sum over sign patterns:
                // Π cos(θᵢ) = 2^{1−n} Σ_ε cos(θ₀ + Σ εᵢ θᵢ).
                let k = *wavenumber;
                let n = xstar.len();
                let mut total = T::zero();
                for mask in 0..(1usize << n) {
                    let mut slope = 1.0;
                    let mut phase = T::zero();
                    for (i, &xi) in xstar.iter().enumerate() {
                        let eps = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                        slope += eps;
                        phase = phase + (x1 * -1.0 + xi) * eps;
                    }
                    let term = if slope == 0.0 {
                        (phase * k).cos() * (b - a)
                    } else {
                        ((b * slope + phase) * k).sin() / (k * slope) - ((a * slope + phase) * k).sin() / (k * slope)
                    };
                    total = total + term;
                }
                total * 0.5f64.powi(n as i32)
            }
        }
    }
}

/// One benchmark instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub key: String,
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
    /// Period of each transverse coordinate.
    pub period: f64,
    pub t_final: f64,
    pub mu: f64,
    pub advection: Advection,
    pub source: Source,
    pub left: f64,
    pub right: f64,
    /// Initial front position h₀*.
    pub h_star: f64,
    /// x₁ location of the initial tanh step at x* = 0.
    pub profile_centre: f64,
}

/// Registered benchmark keys.
pub const PROBLEM_KEYS: [&str; 3] = ["ex1d", "ex2d", "ex3d"];

impl ProblemSpec {
    /// f = x − x² + x³ on [0, 1], L = −10, R = 5, T = 0.3, h₀(0) = 0.1.
    pub fn ex1d(mu: f64) -> Self {
        ProblemSpec {
            key: "ex1d".into(),
            dim: 1,
            lo: 0.0,
            hi: 1.0,
            period: 0.0,
            t_final: 0.3,
            mu,
            advection: Advection::Linear { coeff: -1.0 },
            source: Source::Polynomial { coeffs: vec![0.0, 1.0, -1.0, 1.0] },
            left: -10.0,
            right: 5.0,
            h_star: 0.1,
            profile_centre: 0.1,
        }
    }

    /// f = cos(πx/4)cos(πy/4) on [−2, 2]², period 4 in y, L = −4, R = 2, T = 1.
    pub fn ex2d(mu: f64) -> Self {
        ProblemSpec {
            key: "ex2d".into(),
            dim: 2,
            lo: -2.0,
            hi: 2.0,
            period: 4.0,
            t_final: 1.0,
            mu,
            advection: Advection::Linear { coeff: -1.0 },
            source: Source::CosProduct { wavenumber: PI / 4.0 },
            left: -4.0,
            right: 2.0,
            h_star: 0.0,
            profile_centre: 0.0,
        }
    }

    /// f = cos(πx)cos(πy)cos(πz) on [−1, 1]³, period 2, L = −4, R = 2, T = 0.5.
    pub fn ex3d(mu: f64) -> Self {
        ProblemSpec {
            key: "ex3d".into(),
            dim: 3,
            lo: -1.0,
            hi: 1.0,
            period: 2.0,
            t_final: 0.5,
            mu,
            advection: Advection::Linear { coeff: -1.0 },
            source: Source::CosProduct { wavenumber: PI },
            left: -4.0,
            right: 2.0,
            h_star: 0.0,
            profile_centre: 0.0,
        }
    }

    pub fn by_key(key: &str, mu: f64) -> Result<Self> {
        match key {
            "ex1d" => Ok(Self::ex1d(mu)),
            "ex2d" => Ok(Self::ex2d(mu)),
            "ex3d" => Ok(Self::ex3d(mu)),
            _ => Err(Error::UnknownKey { kind: "problem", key: key.into(), valid: PROBLEM_KEYS.join(", ") }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::config("dim", "must be 1, 2 or 3"));
        }
        if !(self.lo < self.hi) {
            return Err(Error::config("domain", "lo must be below hi"));
        }
        if self.dim > 1 && !(self.period > 0.0) {
            return Err(Error::config("period", "must be positive"));
        }
        if !(self.mu > 0.0) {
            return Err(Error::config("mu", "must be positive"));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::config("t_final", "must be positive"));
        }
        if !(self.lo < self.h_star && self.h_star < self.hi) {
            return Err(Error::config("h_star", "must lie strictly inside the domain"));
        }
        if matches!(self.source, Source::Polynomial { .. }) && self.dim != 1 {
            return Err(Error::config("source", "polynomial sources are one-dimensional"));
        }
        if matches!(self.advection, Advection::Linear { coeff } if coeff == 0.0) {
            return Err(Error::config("advection", "coefficient must be non-zero"));
        }
        Ok(())
    }

    pub fn transverse_dim(&self) -> usize {
        self.dim - 1
    }

    /// Window [lo, lo + P) covered by each transverse coordinate.
    pub fn transverse_bounds(&self) -> (f64, f64) {
        (self.lo, self.lo + self.period)
    }

    /// Full space-time box: x₁, transverse coordinates, then t.
    pub fn space_time_bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(self.lo, self.hi)];
        b.extend(std::iter::repeat_n(self.transverse_bounds(), self.dim - 1));
        b.push((0.0, self.t_final));
        b
    }

    pub fn source_value(&self, x: &[f64]) -> f64 {
        self.source.eval(x)
    }

    /// Initial data (R−L)/2 · tanh((x₁ − c)/μ + Σx*) + (R+L)/2.
    pub fn initial_profile(&self, x: &[f64]) -> f64 {
        let arg = (x[0] - self.profile_centre) / self.mu + x[1..].iter().sum::<f64>();
        0.5 * (self.right - self.left) * stable_tanh(arg) + 0.5 * (self.right + self.left)
    }

    pub fn boundary_value(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.left,
            Side::Plus => self.right,
        }
    }

    fn char_scale(&self) -> f64 {
        match self.advection {
            // (1·∇)(φ²) = −2f / c
            Advection::Linear { coeff } => -2.0 / coeff,
        }
    }

    /// φ^(side)(x₁, x*)², generic in x₁ so it can be differentiated.
    pub fn outer_square<T: Real>(&self, side: Side, x1: T, xstar: &[f64]) -> T {
        let s = self.char_scale();
        match side {
            Side::Minus => self.source.line_integral(x1, xstar, T::constant(self.lo), x1) * s + self.left * self.left,
            Side::Plus => self.source.line_integral(x1, xstar, x1, T::constant(self.hi)) * (-s) + self.right * self.right,
        }
    }

    /// Outer solution value with the sign of its branch.
    pub fn outer_at<T: Real>(&self, side: Side, x1: T, xstar: &[f64]) -> Result<T> {
        let r = self.outer_square(side, x1, xstar);
        if !(r.value() >= 0.0) {
            return Err(Error::DomainViolation { x1: x1.value(), radicand: r.value() });
        }
        Ok(r.sqrt() * side.sign())
    }

    /// φ^(side)(x).
    pub fn outer_value(&self, side: Side, x: &[f64]) -> Result<f64> {
        self.outer_at(side, x[0], &x[1..])
    }

    /// φ computed by integrating the source along the characteristic with
    /// `rule` instead of the closed form.
    pub fn outer_value_quadrature(&self, side: Side, x: &[f64], rule: &QuadratureRule) -> Result<f64> {
        let (x1, xstar) = (x[0], &x[1..]);
        let f = |s: f64| {
            let mut p = vec![s];
            p.extend(xstar.iter().map(|&y| y + s - x1));
            self.source.eval(&p)
        };
        let s = self.char_scale();
        let r = match side {
            Side::Minus => self.left * self.left + s * rule.integrate(self.lo, x1, f)?,
            Side::Plus => self.right * self.right - s * rule.integrate(x1, self.hi, f)?,
        };
        if !(r >= 0.0) {
            return Err(Error::DomainViolation { x1, radicand: r });
        }
        Ok(side.sign() * r.sqrt())
    }

    /// (φ, φ′, φ″) in one dimension from φφ′ = −f/c.
    pub fn outer_derivs_1d(&self, side: Side, x1: f64) -> Result<(f64, f64, f64)> {
        let phi = self.outer_at(side, x1, &[])?;
        let c = 0.5 * self.char_scale();
        let d1 = c * self.source.eval(&[x1]) / phi;
        let d2 = (c * self.source.dx1(x1) - d1 * d1) / phi;
        Ok((phi, d1, d2))
    }

    /// Both outer values at (x₁, x*).
    pub fn outer_pair(&self, x1: f64, xstar: &[f64]) -> Result<(f64, f64)> {
        Ok((self.outer_at(Side::Minus, x1, xstar)?, self.outer_at(Side::Plus, x1, xstar)?))
    }

    /// Front speed from the interface equation given the outer values and the
    /// transverse slopes: h_t = (1 − Σ∂h) ∫A du / (φ⁺ − φ⁻).
    pub fn front_speed(&self, phi_m: f64, phi_p: f64, slopes: &[f64]) -> f64 {
        let s: f64 = slopes.iter().sum();
        (1.0 - s) * self.advection.integral(phi_m, phi_p) / (phi_p - phi_m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ex1d_boundary_values() {
        let p = ProblemSpec::ex1d(1e-2);
        assert!((p.outer_value(Side::Minus, &[0.0]).unwrap() + 10.0).abs() < 1e-12);
        assert!((p.outer_value(Side::Plus, &[1.0]).unwrap() - 5.0).abs() < 1e-12);
        assert!((p.outer_value(Side::Plus, &[0.1]).unwrap() - 4.91691).abs() < 1e-5);
    }

    #[test]
    fn sources_and_profiles() {
        let p = ProblemSpec::ex1d(1e-4);
        assert_eq!(p.source_value(&[0.0]), 0.0);
        assert_eq!(p.source_value(&[1.0]), 1.0);
        assert_eq!(p.initial_profile(&[0.1]), -2.5);
        assert!((p.initial_profile(&[1.0]) - 5.0).abs() < 1e-12);
        let q = ProblemSpec::ex2d(1e-2);
        assert_eq!(q.source_value(&[0.0, 0.0]), 1.0);
        assert_eq!(q.initial_profile(&[0.0, 0.0]), -1.0);
    }

    #[test]
    fn unknown_key_lists_valid_ones() {
        let e = ProblemSpec::by_key("ex4d", 1e-2).unwrap_err().to_string();
        assert!(e.contains("ex1d, ex2d, ex3d"));
    }

    #[test]
    fn radicand_violation() {
        let mut p = ProblemSpec::ex1d(1e-2);
        p.left = 0.0;
        p.source = Source::Polynomial { coeffs: vec![-1.0] };
        assert!(matches!(p.outer_value(Side::Minus, &[0.5]), Err(Error::DomainViolation { .. })));
    }
}
