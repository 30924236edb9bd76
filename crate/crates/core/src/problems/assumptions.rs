use serde::{Deserialize, Serialize};

use super::{ProblemSpec, Side};
use crate::asymptotics::{interface_integrand, FrontEvaluator};
use crate::quadrature::gauss_legendre;
use crate::sampling::lhs_points;

/// A sampled point where a structural assumption failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: String,
    pub x: Vec<f64>,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl AssumptionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples the structural conditions on the outer solutions and the front:
///
/// - φ⁻ < 0 < φ⁺ and A(φ⁻) > 0 > A(φ⁺) at sampled points;
/// - the front stays strictly inside (lo, hi) with Σ∂h₀ < 1;
/// - the partial interface integral Φ(s) = ∫_{φ⁻}^{s} (…) du is positive
///   for s strictly between φ⁻ and φ⁺ at the front.
pub fn assumption_check(p: &ProblemSpec, front: &dyn FrontEvaluator, samples: usize) -> AssumptionReport {
    let mut bounds = vec![(p.lo, p.hi)];
    bounds.extend(std::iter::repeat_n(p.transverse_bounds(), p.dim - 1));
    bounds.push((0.0, p.t_final));
    let rule = gauss_legendre(16).expect("order 16 is valid");
    let mut report = AssumptionReport { samples, violations: vec![] };
    let mut flag = |condition: &str, x: &[f64], t: f64, value: f64| {
        report.violations.push(Violation { condition: condition.into(), x: x.to_vec(), t, value });
    };
    for pt in lhs_points(samples, &bounds, 0) {
        let (x, t) = (&pt[..p.dim], pt[p.dim]);
        match (p.outer_value(Side::Minus, x), p.outer_value(Side::Plus, x)) {
            (Ok(m), Ok(pl)) => {
                if !(m < 0.0) {
                    flag("phi_minus < 0", x, t, m);
                }
                if !(pl > 0.0) {
                    flag("phi_plus > 0", x, t, pl);
                }
                let (am, ap) = (p.advection.eval(m), p.advection.eval(pl));
                if !(am > 0.0) {
                    flag("A(phi_minus) > 0", x, t, am);
                }
                if !(ap < 0.0) {
                    flag("A(phi_plus) < 0", x, t, ap);
                }
            }
            _ => flag("outer solution defined", x, t, f64::NAN),
        }

        let xstar = &x[1..];
        let fs = front.front(xstar, t);
        if !(fs.h0 > p.lo && fs.h0 < p.hi) {
            flag("front inside domain", x, t, fs.h0);
            continue;
        }
        let s: f64 = fs.grad.iter().sum();
        if !(s < 1.0) {
            flag("sum of front slopes < 1", x, t, s);
        }
        let Ok((m, pl)) = p.outer_pair(fs.h0, xstar) else {
            flag("outer solution defined at front", x, t, fs.h0);
            continue;
        };
        let fs = fs.with_speed(p, m, pl);
        for k in 1..8 {
            let top = m + (pl - m) * k as f64 / 8.0;
            let val = rule.integrate(m, top, |u| interface_integrand(p, &fs, u)).unwrap_or(f64::NAN);
            if !(val > 0.0) {
                flag("partial interface integral > 0", x, t, val);
            }
        }
    }
    report
}
