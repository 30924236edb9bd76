//! Inner-layer profiles and composite asymptotic solutions.

mod first_order;

use crate::autodiff::Real;
use crate::error::{Error, Result};
use crate::network::HardIcNet;
use crate::problems::{ProblemSpec, Side};
use crate::quadrature::gauss_legendre;

pub use first_order::{assemble_u1, assemble_u1_with, solve_h1_rk4, FirstOrder, H1Trajectory, LayerData, Q1Context, ScalarPath, Q1_RANGE};

/// Exponent clamp for logistic evaluations.
pub const EXP_CLAMP: f64 = 700.0;

/// Zero-order front position and its partials at one (x*, t).
#[derive(Debug, Clone, PartialEq)]
pub struct FrontState {
    pub h0: f64,
    /// ∂h₀/∂xᵢ for the transverse coordinates.
    pub grad: Vec<f64>,
    pub ht: Option<f64>,
}

impl FrontState {
    pub fn new(h0: f64, grad: Vec<f64>) -> Self {
        FrontState { h0, grad, ht: None }
    }

    pub fn slope_sum(&self) -> f64 {
        self.grad.iter().sum()
    }

    /// √(1 + Σ(∂ᵢh₀)²).
    pub fn metric(&self) -> f64 {
        (1.0 + self.grad.iter().map(|g| g * g).sum::<f64>()).sqrt()
    }

    /// Fills ∂ₜh₀ from the interface equation if it is missing.
    pub fn with_speed(mut self, p: &ProblemSpec, phi_m: f64, phi_p: f64) -> Self {
        if self.ht.is_none() {
            self.ht = Some(p.front_speed(phi_m, phi_p, &self.grad));
        }
        self
    }
}

/// Anything that can report the zero-order front.
pub trait FrontEvaluator {
    fn front(&self, xstar: &[f64], t: f64) -> FrontState;
}

impl FrontEvaluator for HardIcNet {
    fn front(&self, xstar: &[f64], t: f64) -> FrontState {
        let j = self.eval_jet(xstar, t);
        let d = xstar.len();
        FrontState { h0: j.value, grad: j.d1[..d].to_vec(), ht: Some(j.d1[d]) }
    }
}

/// Adapts a closure to [`FrontEvaluator`].
pub struct FnFront<F>(pub F);

impl<F: Fn(&[f64], f64) -> FrontState> FrontEvaluator for FnFront<F> {
    fn front(&self, xstar: &[f64], t: f64) -> FrontState {
        (self.0)(xstar, t)
    }
}

/// Stretched coordinate and logistic parameters at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerScale {
    pub xi: f64,
    /// (1 − Σ∂ᵢh₀) / √(1 + Σ(∂ᵢh₀)²).
    pub k: f64,
    /// P⁻ = ½(φ⁺ − φ⁻) at the front; P⁺ = −P⁻.
    pub p_minus: f64,
}

impl LayerScale {
    pub fn new(front: &FrontState, phi_m: f64, phi_p: f64, x1: f64, mu: f64) -> Self {
        LayerScale {
            xi: (x1 - front.h0) * front.metric() / mu,
            k: (1.0 - front.slope_sum()) / front.metric(),
            p_minus: 0.5 * (phi_p - phi_m),
        }
    }

    pub fn p(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.p_minus,
            Side::Plus => -self.p_minus,
        }
    }
}

/// Q₀ = 2P / (exp(−ξPk) + 1) with the exponent clamped to ±700.
pub fn q0_value(side: Side, scale: &LayerScale) -> f64 {
    let p = scale.p(side);
    let arg = (-scale.xi * p * scale.k).clamp(-EXP_CLAMP, EXP_CLAMP);
    2.0 * p / (arg.exp() + 1.0)
}

/// (−∂ₜh₀ − A(u)(Σ∂ᵢh₀ − 1)) / √(1 + Σ(∂ᵢh₀)²).
pub fn interface_integrand(p: &ProblemSpec, front: &FrontState, u: f64) -> f64 {
    let ht = front.ht.expect("interface integrand needs the front speed");
    interface_integrand_with(p, ht, front.slope_sum(), front.metric(), u)
}

/// Generic form of [`interface_integrand`] for differentiation.
#[inline]
pub fn interface_integrand_with<T: Real>(p: &ProblemSpec, ht: T, slope_sum: T, metric: T, u: T) -> T {
    (-ht - p.advection.eval(u) * (slope_sum - 1.0)) / metric
}

/// Inner profile by integrating the first integral dũ/dξ = Φ(ũ) outward
/// from ũ(0) = ½(φ⁻ + φ⁺). Returns Q₀ = ũ − φ^∓ at each ξ of `grid`
/// (negative ξ on the minus side, positive on the plus side).
pub fn q0_general(p: &ProblemSpec, front: &FrontState, xstar: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let (phi_m, phi_p) = p.outer_pair(front.h0, xstar)?;
    let fs = front.clone().with_speed(p, phi_m, phi_p);
    let rule = gauss_legendre(32)?;
    let phi0 = 0.5 * (phi_m + phi_p);
    let first_integral = |side: Side, u: f64| -> Result<f64> {
        let base = if side == Side::Minus { phi_m } else { phi_p };
        rule.integrate(base, u, |s| interface_integrand(p, &fs, s))
    };
    let max_step = 2e-3;
    let mut out = vec![0.0; grid.len()];
    for side in [Side::Minus, Side::Plus] {
        let dir = side.sign();
        let target = if side == Side::Minus { phi_m } else { phi_p };
        let mut idx: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] * dir > 0.0 || (grid[i] == 0.0 && side == Side::Minus)).collect();
        idx.sort_by(|&a, &b| (grid[a] * dir).total_cmp(&(grid[b] * dir)));
        let (mut xi, mut u) = (0.0f64, phi0);
        let mut settled = false;
        for i in idx {
            let goal = grid[i];
            while !settled && (goal - xi).abs() > 0.0 {
                if (u - target).abs() < 1e-10 {
                    settled = true;
                    break;
                }
                let h = (goal - xi).clamp(-max_step, max_step);
                let rhs = |v: f64| -> Result<f64> {
                    let phi = first_integral(side, v)?;
                    if !(phi > 0.0) && (v - target).abs() >= 1e-10 {
                        return Err(Error::DegenerateProfile { at: v });
                    }
                    Ok(phi)
                };
                let k1 = rhs(u)?;
                let k2 = rhs(u + 0.5 * h * k1)?;
                let k3 = rhs(u + 0.5 * h * k2)?;
                let k4 = rhs(u + h * k3)?;
                u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                xi = if (goal - xi).abs() <= max_step { goal } else { xi + h };
            }
            out[i] = u - target;
        }
    }
    Ok(out)
}

/// U₀ = φ^∓(x) + Q₀^∓(ξ₀), branch chosen by the sign of x₁ − h₀.
pub fn assemble_u0(p: &ProblemSpec, front: &dyn FrontEvaluator, x: &[f64], t: f64) -> Result<f64> {
    let xstar = &x[1..];
    let fs = front.front(xstar, t);
    let (pm, pp) = p.outer_pair(fs.h0, xstar)?;
    let scale = LayerScale::new(&fs, pm, pp, x[0], p.mu);
    let side = if x[0] < fs.h0 { Side::Minus } else { Side::Plus };
    Ok(p.outer_value(side, x)? + q0_value(side, &scale))
}
