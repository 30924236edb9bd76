#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use layerfront::asymptotics::{assemble_u0, q0_general, q0_value, FrontEvaluator, FrontState, LayerScale};
use layerfront::autodiff::record_and_grad;
use layerfront::dae::residual_of_front;
use layerfront::network::{forward_with, MlpParams};
use layerfront::problems::{build_front_oracle, FrontOracle, ProblemSpec, Resolution, Side};
use layerfront::quadrature::gauss_legendre;
use layerfront::sampling::lhs_points;

/// Xavier weights with small random biases so every layer is exercised.
pub fn random_net(sizes: &[usize], seed: u64) -> MlpParams {
    let mut net = MlpParams::init(sizes, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for l in 0..net.layers() {
        for b in net.biases_mut(l) {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    net
}

pub fn oracle_1d(mu: f64) -> (ProblemSpec, FrontOracle) {
    let p = ProblemSpec::ex1d(mu);
    let o = build_front_oracle(&p, Resolution::default_for(&p)).unwrap();
    (p, o)
}

/// Worst relative mismatch between the tape gradient of a scalar loss built
/// from `net` outputs and central differences with step 1e-6.
pub fn fd_param_gradient_error(net: &MlpParams, inputs: &[Vec<f64>]) -> f64 {
    let sizes = net.sizes().to_vec();
    let loss = |theta: &[f64]| -> f64 {
        inputs.iter().map(|x| forward_with(&sizes, theta, x).powi(2)).sum::<f64>() * 0.5
    };
    let (_, grad) = record_and_grad(&net.theta, |th| {
        let mut acc = None;
        for x in inputs {
            let xv: Vec<_> = x.iter().map(|&v| layerfront::autodiff::Real::constant(v)).collect();
            let y = forward_with(&sizes, th, &xv);
            let term = y * y * 0.5;
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap()
    })
    .unwrap();
    let h = 1e-6;
    let mut theta = net.theta.clone();
    let mut worst: f64 = 0.0;
    for i in 0..theta.len() {
        let orig = theta[i];
        theta[i] = orig + h;
        let up = loss(&theta);
        theta[i] = orig - h;
        let dn = loss(&theta);
        theta[i] = orig;
        let fd = (up - dn) / (2.0 * h);
        let scale = grad[i].abs().max(fd.abs()).max(1e-3);
        worst = worst.max((grad[i] - fd).abs() / scale);
    }
    worst
}

/// Largest error of the M-point rule on x^k over [−1, 1], k ≤ 2M−1.
pub fn gauss_exactness_error(m: usize) -> f64 {
    let rule = gauss_legendre(m).unwrap();
    (0..2 * m)
        .map(|k| {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            (rule.integrate(-1.0, 1.0, |x| x.powi(k as i32)).unwrap() - exact).abs()
        })
        .fold(0.0, f64::max)
}

/// (matching error at ξ = 0, whether the exponential decay bound holds on a
/// ξ grid) for the 1D front at t = 0.
pub fn q0_matching_and_decay() -> (f64, bool) {
    let p = ProblemSpec::ex1d(1e-2);
    let fs = FrontState::new(0.1, vec![]);
    let (m, pl) = p.outer_pair(0.1, &[]).unwrap();
    let s = LayerScale::new(&fs, m, pl, 0.1, p.mu);
    let phi0 = 0.5 * (m + pl);
    let err = (m + q0_value(Side::Minus, &s) - phi0).abs().max((pl + q0_value(Side::Plus, &s) - phi0).abs());
    let kappa = s.p_minus * s.k;
    let c = 2.0 * s.p_minus;
    let decay = (0..=400).all(|i| {
        let xi = -0.1 * i as f64;
        let q = q0_value(Side::Minus, &LayerScale { xi, ..s });
        let qp = q0_value(Side::Plus, &LayerScale { xi: -xi, ..s });
        let bound = c * (kappa * xi).exp();
        q.abs() <= bound * (1.0 + 1e-12) && qp.abs() <= bound * (1.0 + 1e-12)
    });
    (err, decay)
}

/// Largest gap between the numerically integrated inner profile and the
/// logistic closed form for ξ ∈ [−20, 20].
pub fn q0_general_gap() -> f64 {
    let p = ProblemSpec::ex1d(1e-2);
    let fs = FrontState::new(0.1, vec![]);
    let grid: Vec<f64> = (-40..=40).map(|i| 0.5 * i as f64).collect();
    let numeric = q0_general(&p, &fs, &[], &grid).unwrap();
    let (m, pl) = p.outer_pair(0.1, &[]).unwrap();
    grid.iter()
        .zip(&numeric)
        .map(|(&xi, &q)| {
            let side = if xi <= 0.0 { Side::Minus } else { Side::Plus };
            let s = LayerScale::new(&fs, m, pl, 0.1 + xi * p.mu, p.mu);
            (q - q0_value(side, &LayerScale { xi, ..s })).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest |R| of the oracle front at `n` random times.
pub fn oracle_residual_max(p: &ProblemSpec, oracle: &FrontOracle, n: usize, seed: u64) -> f64 {
    let rule = gauss_legendre(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = p.transverse_bounds();
    (0..n)
        .map(|_| {
            let xs: Vec<f64> = (0..p.transverse_dim()).map(|_| rng.random_range(lo..hi)).collect();
            let t = rng.random_range(0.0..p.t_final);
            residual_of_front(p, &oracle.front(&xs, t), &xs, &rule).unwrap().abs()
        })
        .fold(0.0, f64::max)
}

/// Width of the region where |U₀ − φ^∓| exceeds μ times the jump, at t = 0.1.
pub fn layer_width(mu: f64) -> f64 {
    let (p, oracle) = oracle_1d(mu);
    let t = 0.1;
    let h0 = oracle.h0(&[], t);
    let (m, pl) = p.outer_pair(h0, &[]).unwrap();
    let threshold = mu * (pl - m);
    let n = 200_000;
    let (a, b) = (h0 - 0.2, h0 + 0.2);
    let step = (b - a) / n as f64;
    let inside = (0..=n)
        .filter(|&i| {
            let x = a + i as f64 * step;
            let side = if x < h0 { Side::Minus } else { Side::Plus };
            let u = assemble_u0(&p, &oracle, &[x], t).unwrap();
            (u - p.outer_value(side, &[x]).unwrap()).abs() > threshold
        })
        .count();
    inside as f64 * step
}

/// sup |U₀ − φ^∓| over x outside the strip of half-width 10 μ|ln μ|. The
/// difference is the inner term Q₀, evaluated directly so it does not
/// cancel against φ in floating point.
pub fn outside_strip_sup(mu: f64) -> f64 {
    let (p, oracle) = oracle_1d(mu);
    let half = 10.0 * mu * mu.ln().abs();
    let mut sup: f64 = 0.0;
    for k in 0..=30 {
        let t = 0.01 * k as f64;
        let fs = oracle.front(&[], t);
        let (m, pl) = p.outer_pair(fs.h0, &[]).unwrap();
        for i in 0..=2000 {
            let x = p.lo + (p.hi - p.lo) * i as f64 / 2000.0;
            if (x - fs.h0).abs() < half {
                continue;
            }
            let side = if x < fs.h0 { Side::Minus } else { Side::Plus };
            let q = q0_value(side, &LayerScale::new(&fs, m, pl, x, p.mu));
            sup = sup.max(q.abs());
        }
    }
    sup
}

/// Every coordinate has exactly one point per stratum.
pub fn lhs_stratified(n: usize, bounds: &[(f64, f64)], seed: u64) -> bool {
    let pts = lhs_points(n, bounds, seed);
    bounds.iter().enumerate().all(|(d, &(lo, hi))| {
        let mut hits = vec![0usize; n];
        for p in &pts {
            let k = (((p[d] - lo) / (hi - lo)) * n as f64).floor() as usize;
            hits[k.min(n - 1)] += 1;
        }
        hits.iter().all(|&h| h == 1)
    })
}
