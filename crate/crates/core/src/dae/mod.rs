//! Deep asymptotic expansion: learn the zero-order front by minimizing the
//! interface-equation residual.

mod first_order;
mod rar;

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{interface_integrand_with, FrontState};
use rayon::prelude::*;

use crate::autodiff::{batch_grad, Jet, Real, Var, MAX_SLOTS};
use crate::error::{Error, Result};
use crate::network::{AdamState, HardIcNet, MlpParams, Trace};
use crate::problems::{ProblemSpec, Side};
use crate::quadrature::{gauss_legendre, QuadratureRule};
use crate::sampling::{uniform_points, Point};

pub use first_order::{train_h1, H1Config, H1Net, H1Run};
pub use rar::{rar_refine, top_m, RarConfig, RarOutcome, Refinable};

/// Squared-residual stand-in for points whose outer interval is invalid.
pub const INVALID_PENALTY: f64 = 1e6;

/// Hyperparameters of a DAE (or PINN) training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    pub iterations: usize,
    /// Residual points N_h.
    pub n_residual: usize,
    /// Periodicity points N_hp.
    #[serde(default)]
    pub n_periodic: usize,
    /// Boundary points (PINN only).
    #[serde(default)]
    pub n_boundary: usize,
    /// Initial-time points (PINN only).
    #[serde(default)]
    pub n_initial: usize,
    /// Weights of the PDE, boundary and initial terms (PINN only).
    #[serde(default = "default_weights")]
    pub loss_weights: [f64; 3],
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Points per tape when evaluating the loss.
    #[serde(default = "default_chunk")]
    pub chunk: usize,
}

fn default_quad_order() -> usize {
    32
}
fn default_lr() -> f64 {
    1e-3
}
fn default_seed() -> u64 {
    1234
}
fn default_chunk() -> usize {
    64
}
fn default_weights() -> [f64; 3] {
    [1.0; 3]
}

impl TrainConfig {
    pub fn new(depth: usize, width: usize, iterations: usize, n_residual: usize, n_periodic: usize) -> Self {
        TrainConfig {
            hidden: vec![width; depth],
            iterations,
            n_residual,
            n_periodic,
            n_boundary: 0,
            n_initial: 0,
            loss_weights: default_weights(),
            quad_order: default_quad_order(),
            lr: default_lr(),
            seed: default_seed(),
            chunk: default_chunk(),
        }
    }

    /// Full layer sizes for a network with `input` inputs and one output.
    pub fn layer_sizes(&self, input: usize) -> Vec<usize> {
        let mut sizes = vec![input];
        sizes.extend(&self.hidden);
        sizes.push(1);
        sizes
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::config("iterations", "must be at least 1"));
        }
        if self.n_residual == 0 {
            return Err(Error::config("n_residual", "must be at least 1"));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::config("hidden", "need at least one hidden layer of positive width"));
        }
        if !(self.lr > 0.0) {
            return Err(Error::config("lr", "must be positive"));
        }
        if !(1..=64).contains(&self.quad_order) {
            return Err(Error::config("quad_order", "must be in 1..=64"));
        }
        Ok(())
    }
}

/// ĥ₀ jet for a known front state (slots: transverse axes, then t).
pub fn front_jet(fs: &FrontState) -> Jet<f64> {
    let mut d1 = fs.grad.clone();
    d1.push(fs.ht.expect("front speed required"));
    Jet::from_parts(fs.h0, &d1, &[])
}

/// Quadrature interface residual for a front jet; `None` if φ⁻ < φ⁺ fails
/// at the front.
pub fn residual_from_jet<T: Real>(p: &ProblemSpec, jet: &Jet<T>, xstar: &[f64], rule: &QuadratureRule) -> Option<T> {
    let d = xstar.len();
    let h = jet.value;
    let ht = jet.d1[d];
    let phi_m = p.outer_at(Side::Minus, h, xstar).ok()?;
    let phi_p = p.outer_at(Side::Plus, h, xstar).ok()?;
    if !(phi_p.value() > phi_m.value()) {
        return None;
    }
    let (slope_sum, metric) = if d == 0 {
        (T::zero(), T::constant(1.0))
    } else {
        let g = &jet.d1[..d];
        let sq: Vec<T> = g.iter().map(|x| x.square()).collect();
        (T::sum(g), (T::sum(&sq) + 1.0).sqrt())
    };
    let mid = (phi_m + phi_p) * 0.5;
    let half = (phi_p - phi_m) * 0.5;
    let vals: Vec<T> = rule
        .nodes
        .iter()
        .map(|&x| interface_integrand_with(p, ht, slope_sum, metric, mid + half * x))
        .collect();
    let weights: Vec<T> = rule.weights.iter().map(|&w| T::constant(w)).collect();
    Some(T::dot(&weights, &vals, T::zero()) * half)
}

/// Residual R_j of the trained front at (x*, t).
pub fn interface_residual_at(net: &HardIcNet, p: &ProblemSpec, xstar: &[f64], t: f64, rule: &QuadratureRule) -> Option<f64> {
    residual_from_jet(p, &net.eval_jet(xstar, t), xstar, rule)
}

/// Residual of an arbitrary front state (e.g. one taken from an oracle).
pub fn residual_of_front(p: &ProblemSpec, fs: &FrontState, xstar: &[f64], rule: &QuadratureRule) -> Option<f64> {
    residual_from_jet(p, &front_jet(fs), xstar, rule)
}

/// Training points of the DAE loss.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DaePoints {
    pub residual: Vec<Point>,
    pub periodic: Vec<Point>,
}

impl DaePoints {
    /// Uniform points in [0, P)^{d−1} × [0, T].
    pub fn sample(p: &ProblemSpec, n_residual: usize, n_periodic: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut bounds = vec![p.transverse_bounds(); p.dim - 1];
        bounds.push((0.0, p.t_final));
        let to_points = |v: Vec<Vec<f64>>| -> Vec<Point> { v.into_iter().map(Point::from_row).collect() };
        let residual = to_points(uniform_points(n_residual, &bounds, &mut rng));
        let periodic = if p.dim > 1 { to_points(uniform_points(n_periodic, &bounds, &mut rng)) } else { vec![] };
        DaePoints { residual, periodic }
    }
}

fn loss_terms<'t>(
    net: &HardIcNet,
    p: &ProblemSpec,
    pts: &DaePoints,
    rule: &QuadratureRule,
    theta: &[Var<'t>],
    range: std::ops::Range<usize>,
    invalid: &AtomicUsize,
) -> Var<'t> {
    let n1 = pts.residual.len();
    let n2 = pts.periodic.len();
    let mut terms = Vec::with_capacity(range.len());
    for i in range {
        if i < n1 {
            let pt = &pts.residual[i];
            let jet = net.eval_jet_with(theta, &pt.x, pt.t);
            match residual_from_jet(p, &jet, &pt.x, rule) {
                Some(r) => terms.push(r.square() * (1.0 / n1 as f64)),
                None => {
                    invalid.fetch_add(1, Ordering::Relaxed);
                    terms.push(Var::constant(INVALID_PENALTY / n1 as f64));
                }
            }
        } else {
            let pt = &pts.periodic[i - n1];
            let base: Var = net.eval_with(theta, &pt.x, pt.t);
            for axis in 0..pt.x.len() {
                let mut shifted = pt.x.clone();
                shifted[axis] += p.period;
                let other: Var = net.eval_with(theta, &shifted, pt.t);
                terms.push((other - base).square() * (1.0 / n2 as f64));
            }
        }
    }
    Var::sum(&terms)
}

/// Residual and its partials with respect to (h₀, ∂ᵢh₀…, ∂ₜh₀).
pub fn residual_partials(p: &ProblemSpec, h: f64, grad: &[f64], ht: f64, xstar: &[f64], rule: &QuadratureRule) -> Option<(f64, [f64; MAX_SLOTS])> {
    let n = grad.len() + 2;
    let var = |v: f64, slot: usize| Jet::<f64>::variable(v, slot, n, 0);
    let mut d1: Vec<Jet<f64>> = grad.iter().enumerate().map(|(i, &g)| var(g, i + 1)).collect();
    d1.push(var(ht, n - 1));
    let jet = Jet::from_parts(var(h, 0), &d1, &[]);
    let r = residual_from_jet(p, &jet, xstar, rule)?;
    Some((r.value, r.d1))
}

/// Loss value and parameter gradient.
pub fn dae_loss_grad(
    net: &HardIcNet,
    p: &ProblemSpec,
    pts: &DaePoints,
    rule: &QuadratureRule,
    chunk: usize,
) -> Result<(f64, Vec<f64>)> {
    let theta = &net.net.theta;
    let sizes = net.net.sizes();
    let (n1, n2) = (pts.residual.len(), pts.periodic.len());
    let total = n1 + n2;
    let chunk = chunk.max(1);
    let invalid = AtomicUsize::new(0);
    let parts: Vec<(f64, Vec<f64>)> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut jet_trace = Trace::new(sizes, sizes[0], 0);
            let mut value_trace = Trace::new(sizes, 0, 0);
            let mut grad = vec![0.0; theta.len()];
            let mut loss = 0.0;
            let mut input = Vec::with_capacity(sizes[0]);
            let mut adj = vec![0.0; sizes[0] + 1];
            for i in c * chunk..((c + 1) * chunk).min(total) {
                if i < n1 {
                    let pt = &pts.residual[i];
                    let d = pt.x.len();
                    let t = pt.t;
                    input.clear();
                    input.extend(&pt.x);
                    input.push(t);
                    let out = jet_trace.forward(theta, &input);
                    let h = t * out[0] + net.h_star;
                    let g: Vec<f64> = out[1..1 + d].iter().map(|v| t * v).collect();
                    let ht = out[0] + t * out[1 + d];
                    match residual_partials(p, h, &g, ht, &pt.x, rule) {
                        Some((r, dr)) => {
                            loss += r * r / n1 as f64;
                            let c = 2.0 * r / n1 as f64;
                            adj[0] = c * (t * dr[0] + dr[d + 1]);
                            for k in 0..=d {
                                adj[1 + k] = c * t * dr[1 + k];
                            }
                            jet_trace.backward(theta, &adj, &mut grad);
                        }
                        None => {
                            invalid.fetch_add(1, Ordering::Relaxed);
                            loss += INVALID_PENALTY / n1 as f64;
                        }
                    }
                } else {
                    let pt = &pts.periodic[i - n1];
                    let t = pt.t;
                    input.clear();
                    input.extend(&pt.x);
                    input.push(t);
                    for axis in 0..pt.x.len() {
                        input[axis] = pt.x[axis];
                        let base = value_trace.forward(theta, &input)[0];
                        input[axis] += p.period;
                        let shifted = value_trace.forward(theta, &input)[0];
                        let diff = t * (shifted - base);
                        loss += diff * diff / n2 as f64;
                        let c = 2.0 * diff * t / n2 as f64;
                        value_trace.backward(theta, &[c], &mut grad);
                        input[axis] = pt.x[axis];
                        value_trace.forward(theta, &input);
                        value_trace.backward(theta, &[-c], &mut grad);
                    }
                }
            }
            (loss, grad)
        })
        .collect();
    let bad = invalid.load(Ordering::Relaxed);
    if bad > 0 {
        log::warn!("{bad} residual points with invalid outer interval; penalized");
    }
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    for (l, g) in parts {
        loss += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index });
    }
    Ok((loss, grad))
}

/// [`dae_loss_grad`] through the generic tape; slower, used as a reference.
pub fn dae_loss_grad_tape(
    net: &HardIcNet,
    p: &ProblemSpec,
    pts: &DaePoints,
    rule: &QuadratureRule,
    chunk: usize,
) -> Result<(f64, Vec<f64>)> {
    let invalid = AtomicUsize::new(0);
    let n = pts.residual.len() + pts.periodic.len();
    batch_grad(&net.net.theta, n, chunk, |theta, range| loss_terms(net, p, pts, rule, theta, range, &invalid))
}

/// Mean squared residual plus mean squared periodicity mismatch.
pub fn dae_loss(net: &HardIcNet, p: &ProblemSpec, pts: &DaePoints, rule: &QuadratureRule) -> f64 {
    let n1 = pts.residual.len() as f64;
    let mut total = 0.0;
    for pt in &pts.residual {
        total += match interface_residual_at(net, p, &pt.x, pt.t, rule) {
            Some(r) => r * r,
            None => INVALID_PENALTY,
        } / n1;
    }
    let n2 = pts.periodic.len() as f64;
    for pt in &pts.periodic {
        let base = net.eval(&pt.x, pt.t);
        for axis in 0..pt.x.len() {
            let mut shifted = pt.x.clone();
            shifted[axis] += p.period;
            total += (net.eval(&shifted, pt.t) - base).powi(2) / n2;
        }
    }
    total
}

/// Full-batch Adam on the DAE loss.
#[derive(Debug, Clone)]
pub struct DaeTrainer {
    pub problem: ProblemSpec,
    pub config: TrainConfig,
    pub net: HardIcNet,
    pub adam: AdamState,
    pub points: DaePoints,
    pub history: Vec<f64>,
    rule: QuadratureRule,
}

impl DaeTrainer {
    pub fn new(p: &ProblemSpec, cfg: &TrainConfig) -> Result<Self> {
        p.validate()?;
        cfg.validate()?;
        let sizes = cfg.layer_sizes(p.dim);
        let net = HardIcNet::new(MlpParams::init(&sizes, cfg.seed)?, p.h_star);
        let points = DaePoints::sample(p, cfg.n_residual, cfg.n_periodic, cfg.seed);
        Ok(DaeTrainer {
            problem: p.clone(),
            config: cfg.clone(),
            adam: AdamState::new(net.net.len(), cfg.lr),
            net,
            points,
            history: Vec::with_capacity(cfg.iterations),
            rule: gauss_legendre(cfg.quad_order)?,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn loss_and_grad(&self) -> Result<(f64, Vec<f64>)> {
        dae_loss_grad(&self.net, &self.problem, &self.points, &self.rule, self.config.chunk)
    }

    pub fn loss(&self) -> f64 {
        dae_loss(&self.net, &self.problem, &self.points, &self.rule)
    }

    /// Runs `iterations` Adam steps, recording the loss before each step.
    pub fn train(&mut self, iterations: usize) -> Result<()> {
        for _ in 0..iterations {
            let iteration = self.history.len();
            let fail = |e: Error, history: &[f64]| Error::Diverged { iteration, source: Box::new(e), history: history.to_vec() };
            let (loss, grad) = self.loss_and_grad().map_err(|e| fail(e, &self.history))?;
            if !loss.is_finite() {
                return Err(fail(Error::NonFiniteGradient { index: 0 }, &self.history));
            }
            self.history.push(loss);
            self.adam.step(&mut self.net.net.theta, &grad).map_err(|e| fail(e, &self.history))?;
            if iteration.is_multiple_of(1000) {
                log::info!("dae iteration {iteration}: loss {loss:e}");
            }
        }
        Ok(())
    }

    pub fn residual(&self, pt: &Point) -> Option<f64> {
        interface_residual_at(&self.net, &self.problem, &pt.x, pt.t, &self.rule)
    }
}

impl Refinable for DaeTrainer {
    fn residuals(&self, candidates: &[Point]) -> Vec<f64> {
        use rayon::prelude::*;
        candidates.par_iter().map(|pt| self.residual(pt).map_or(INVALID_PENALTY.sqrt(), f64::abs)).collect()
    }

    fn add_points(&mut self, points: Vec<Point>) {
        self.points.residual.extend(points);
    }

    fn retrain(&mut self, iterations: usize) -> Result<()> {
        self.train(iterations)
    }

    fn training_len(&self) -> usize {
        self.points.residual.len()
    }
}

/// Trains ĥ₀ and returns it with the per-iteration loss.
pub fn train_dae(p: &ProblemSpec, cfg: &TrainConfig) -> Result<(HardIcNet, Vec<f64>)> {
    let mut tr = DaeTrainer::new(p, cfg)?;
    tr.train(cfg.iterations)?;
    Ok((tr.net, tr.history))
}
