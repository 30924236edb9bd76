//! Gauss–Legendre rules.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// M-point Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Builds the M-point rule, 1 ≤ M ≤ 64.
pub fn gauss_legendre(m: usize) -> Result<QuadratureRule> {
    if !(1..=64).contains(&m) {
        return Err(Error::config("quadrature order", format!("{m} not in 1..=64")));
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        // Chebyshev-like initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            // Newton can stall one ulp away from the root.
            let (p, _) = legendre(m, x);
            if p.abs() > 1e-13 {
                return Err(Error::QuadratureConvergence { order: m });
            }
        }
        let (_, dp) = legendre(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// ∫ₐᵇ f; a > b flips the sign.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        let mut sum = 0.0;
        for (u, w) in self.mapped(a, b) {
            let y = f(u);
            if !y.is_finite() {
                return Err(Error::NonFiniteIntegrand { at: u });
            }
            sum += w * y;
        }
        Ok(sum)
    }

    /// ∫ₐᵇ f split into `panels` equal subintervals.
    pub fn integrate_composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        let h = (b - a) / panels as f64;
        let mut sum = 0.0;
        for k in 0..panels {
            let lo = a + k as f64 * h;
            sum += self.integrate(lo, lo + h, &mut f)?;
        }
        Ok(sum)
    }
}

/// Free-function form of [`QuadratureRule::integrate`].
pub fn integrate(f: impl FnMut(f64) -> f64, a: f64, b: f64, rule: &QuadratureRule) -> Result<f64> {
    rule.integrate(a, b, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!((r.nodes[0], r.weights[0]), (0.0, 2.0));
        let r = gauss_legendre(2).unwrap();
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        let r = gauss_legendre(3).unwrap();
        assert!((r.nodes[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((r.weights[0] - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn order_bounds() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(65).is_err());
        assert!(gauss_legendre(64).is_ok());
    }

    #[test]
    fn empty_interval_and_non_finite() {
        let r = gauss_legendre(4).unwrap();
        assert_eq!(r.integrate(1.0, 1.0, |x| x * x).unwrap(), 0.0);
        assert!(matches!(r.integrate(0.0, 1.0, |x| 1.0 / (x - x)), Err(Error::NonFiniteIntegrand { .. })));
    }
}
