//! Full-field PINN baseline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{batch_grad, Jet, Real, Var};
use crate::dae::{Refinable, TrainConfig};
use crate::error::{Error, Result};
use crate::network::{forward_jet, forward_with, AdamState, MlpParams, Trace};
use crate::problems::{ProblemSpec, Side};
use crate::sampling::{uniform_points, Point};

/// Collocation sets of the PINN loss. Boundary points carry only the
/// transverse coordinates; both Dirichlet faces are evaluated for each.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PinnPointSets {
    pub interior: Vec<Point>,
    pub boundary: Vec<Point>,
    pub periodic: Vec<Point>,
    pub initial: Vec<Point>,
}

impl PinnPointSets {
    /// Uniform sets: interior in D × (0, T], boundary and periodic with
    /// `n_boundary` points each, initial at t = 0.
    pub fn sample(p: &ProblemSpec, n_interior: usize, n_boundary: usize, n_initial: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(3);
        let mut space = vec![(p.lo, p.hi)];
        space.extend(std::iter::repeat_n(p.transverse_bounds(), p.dim - 1));
        let mut interior_box = space.clone();
        interior_box.push((0.0, 1.0));
        let interior = uniform_points(n_interior, &interior_box, &mut rng)
            .into_iter()
            .map(|mut r| {
                let u = r.pop().unwrap();
                Point { x: r, t: p.t_final * (1.0 - u) }
            })
            .collect();
        let mut face = vec![p.transverse_bounds(); p.dim - 1];
        face.push((0.0, p.t_final));
        let boundary = uniform_points(n_boundary, &face, &mut rng).into_iter().map(Point::from_row).collect();
        let periodic = if p.dim > 1 {
            let mut b = space.clone();
            b.push((0.0, p.t_final));
            uniform_points(n_boundary, &b, &mut rng).into_iter().map(Point::from_row).collect()
        } else {
            vec![]
        };
        let initial = uniform_points(n_initial, &space, &mut rng).into_iter().map(|x| Point { x, t: 0.0 }).collect();
        PinnPointSets { interior, boundary, periodic, initial }
    }

    fn total(&self) -> usize {
        self.interior.len() + self.boundary.len() + self.periodic.len() + self.initial.len()
    }
}

fn network_input(x: &[f64], t: f64) -> Vec<f64> {
    let mut v = x.to_vec();
    v.push(t);
    v
}

/// μΔû − ∂ₜû − A(û)(1·∇û) − f for a jet whose slots are (x₁…x_d, t) with
/// second derivatives on the spatial slots.
pub fn pde_residual_from_jet<T: Real>(p: &ProblemSpec, jet: &Jet<T>, x: &[f64]) -> T {
    let d = x.len();
    let grad_sum = T::sum(&jet.d1[..d]);
    let lap = T::sum(&jet.d2[..d]);
    lap * p.mu - jet.d1[d] - p.advection.eval(jet.value) * grad_sum - p.source_value(x)
}

fn input_jets<T: Real>(x: &[f64], t: f64) -> Vec<Jet<T>> {
    let d = x.len();
    let mut v: Vec<Jet<T>> = x.iter().enumerate().map(|(i, &xi)| Jet::variable(T::constant(xi), i, d + 1, d)).collect();
    v.push(Jet::variable(T::constant(t), d, d + 1, d));
    v
}

/// PDE residual 𝒢 of the network at (x, t).
pub fn pde_residual(net: &MlpParams, p: &ProblemSpec, x: &[f64], t: f64) -> f64 {
    let jet = forward_jet(net.sizes(), &net.theta, &input_jets::<f64>(x, t));
    pde_residual_from_jet(p, &jet, x)
}

fn eval_at<T: Real>(sizes: &[usize], theta: &[T], input: &[f64]) -> T {
    let lifted: Vec<T> = input.iter().map(|&v| T::constant(v)).collect();
    forward_with(sizes, theta, &lifted)
}

fn loss_with<T: Real>(
    sizes: &[usize],
    theta: &[T],
    p: &ProblemSpec,
    sets: &PinnPointSets,
    w: [f64; 3],
    range: std::ops::Range<usize>,
) -> Vec<T> {
    let (n_f, n_b, n_p) = (sets.interior.len(), sets.boundary.len(), sets.periodic.len());
    let n_i = sets.initial.len();
    let mut terms = Vec::new();
    for i in range {
        if i < n_f {
            let pt = &sets.interior[i];
            let jet = forward_jet(sizes, theta, &input_jets::<T>(&pt.x, pt.t));
            terms.push(pde_residual_from_jet(p, &jet, &pt.x).square() * (w[0] / n_f as f64));
        } else if i < n_f + n_b {
            let pt = &sets.boundary[i - n_f];
            for side in [Side::Minus, Side::Plus] {
                let x1 = if side == Side::Minus { p.lo } else { p.hi };
                let mut input = vec![x1];
                input.extend(&pt.x);
                input.push(pt.t);
                let v: T = eval_at(sizes, theta, &input);
                terms.push((v - p.boundary_value(side)).square() * (w[1] / n_b as f64));
            }
        } else if i < n_f + n_b + n_p {
            let pt = &sets.periodic[i - n_f - n_b];
            let base: T = eval_at(sizes, theta, &network_input(&pt.x, pt.t));
            for axis in 1..pt.x.len() {
                let mut x = pt.x.clone();
                x[axis] += p.period;
                let v: T = eval_at(sizes, theta, &network_input(&x, pt.t));
                terms.push((v - base).square() * (w[1] / n_p as f64));
            }
        } else {
            let pt = &sets.initial[i - n_f - n_b - n_p];
            let v: T = eval_at(sizes, theta, &network_input(&pt.x, 0.0));
            terms.push((v - p.initial_profile(&pt.x)).square() * (w[2] / n_i as f64));
        }
    }
    terms
}

/// L_PDE + L_BC + L_IC, each a mean of squares, scaled by `weights`.
pub fn pinn_loss(net: &MlpParams, p: &ProblemSpec, sets: &PinnPointSets, weights: [f64; 3]) -> f64 {
    loss_with(net.sizes(), &net.theta, p, sets, weights, 0..sets.total()).iter().sum()
}

/// [`pinn_loss_grad`] through the generic tape; slower, used as a reference.
pub fn pinn_loss_grad_tape(net: &MlpParams, p: &ProblemSpec, sets: &PinnPointSets, weights: [f64; 3]) -> Result<(f64, Vec<f64>)> {
    let sizes = net.sizes();
    batch_grad(&net.theta, sets.total(), 64, |theta, range| Var::sum(&loss_with(sizes, theta, p, sets, weights, range)))
}

/// Loss value and parameter gradient.
pub fn pinn_loss_grad(net: &MlpParams, p: &ProblemSpec, sets: &PinnPointSets, weights: [f64; 3], chunk: usize) -> Result<(f64, Vec<f64>)> {
    let theta = &net.theta;
    let sizes = net.sizes();
    let d = p.dim;
    let (n_f, n_b, n_p) = (sets.interior.len(), sets.boundary.len(), sets.periodic.len());
    let n_i = sets.initial.len();
    let total = sets.total();
    let chunk = chunk.max(1);
    let parts: Vec<(f64, Vec<f64>)> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut jt = Trace::new(sizes, d + 1, d);
            let mut vt = Trace::new(sizes, 0, 0);
            let mut grad = vec![0.0; theta.len()];
            let mut loss = 0.0;
            let mut adj = vec![0.0; 2 * d + 2];
            // value-only squared mismatch against `target`
            let square = |input: &[f64], target: f64, scale: f64, grad: &mut [f64], vt: &mut Trace| {
                let r = vt.forward(theta, input)[0] - target;
                vt.backward(theta, &[2.0 * r * scale], grad);
                r * r * scale
            };
            for i in c * chunk..((c + 1) * chunk).min(total) {
                if i < n_f {
                    let pt = &sets.interior[i];
                    let out = jt.forward(theta, &network_input(&pt.x, pt.t));
                    let (v, g, lap) = (out[0], out[1..1 + d].iter().sum::<f64>(), out[d + 2..].iter().sum::<f64>());
                    let a = p.advection.eval(v);
                    let r = p.mu * lap - out[1 + d] - a * g - p.source_value(&pt.x);
                    let scale = weights[0] / n_f as f64;
                    loss += r * r * scale;
                    let c = 2.0 * r * scale;
                    adj[0] = -c * p.advection.du(v) * g;
                    adj[1..1 + d].fill(-c * a);
                    adj[1 + d] = -c;
                    adj[d + 2..].fill(c * p.mu);
                    jt.backward(theta, &adj, &mut grad);
                } else if i < n_f + n_b {
                    let pt = &sets.boundary[i - n_f];
                    for side in [Side::Minus, Side::Plus] {
                        let x1 = if side == Side::Minus { p.lo } else { p.hi };
                        let mut input = vec![x1];
                        input.extend(&pt.x);
                        input.push(pt.t);
                        loss += square(&input, p.boundary_value(side), weights[1] / n_b as f64, &mut grad, &mut vt);
                    }
                } else if i < n_f + n_b + n_p {
                    let pt = &sets.periodic[i - n_f - n_b];
                    let scale = weights[1] / n_p as f64;
                    let input = network_input(&pt.x, pt.t);
                    for axis in 1..d {
                        let mut shifted = input.clone();
                        shifted[axis] += p.period;
                        let base = vt.forward(theta, &input)[0];
                        let r = vt.forward(theta, &shifted)[0] - base;
                        loss += r * r * scale;
                        vt.backward(theta, &[2.0 * r * scale], &mut grad);
                        vt.forward(theta, &input);
                        vt.backward(theta, &[-2.0 * r * scale], &mut grad);
                    }
                } else {
                    let pt = &sets.initial[i - n_f - n_b - n_p];
                    let input = network_input(&pt.x, 0.0);
                    loss += square(&input, p.initial_profile(&pt.x), weights[2] / n_i as f64, &mut grad, &mut vt);
                }
            }
            (loss, grad)
        })
        .collect();
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    for (l, g) in parts {
        loss += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    if !loss.is_finite() {
        return Err(Error::NonFiniteGradient { index: 0 });
    }
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index });
    }
    Ok((loss, grad))
}

/// Full-batch Adam on the PINN loss.
#[derive(Debug, Clone)]
pub struct PinnTrainer {
    pub problem: ProblemSpec,
    pub config: TrainConfig,
    pub net: MlpParams,
    pub adam: AdamState,
    pub points: PinnPointSets,
    pub history: Vec<f64>,
}

impl PinnTrainer {
    pub fn new(p: &ProblemSpec, cfg: &TrainConfig) -> Result<Self> {
        p.validate()?;
        cfg.validate()?;
        if cfg.n_boundary == 0 || cfg.n_initial == 0 {
            return Err(Error::config("n_boundary/n_initial", "PINN needs boundary and initial points"));
        }
        let net = MlpParams::init(&cfg.layer_sizes(p.dim + 1), cfg.seed)?;
        Ok(PinnTrainer {
            problem: p.clone(),
            config: cfg.clone(),
            adam: AdamState::new(net.len(), cfg.lr),
            points: PinnPointSets::sample(p, cfg.n_residual, cfg.n_boundary, cfg.n_initial, cfg.seed),
            net,
            history: Vec::with_capacity(cfg.iterations),
        })
    }

    pub fn loss_and_grad(&self) -> Result<(f64, Vec<f64>)> {
        pinn_loss_grad(&self.net, &self.problem, &self.points, self.config.loss_weights, self.config.chunk)
    }

    pub fn train(&mut self, iterations: usize) -> Result<()> {
        for _ in 0..iterations {
            let iteration = self.history.len();
            let fail = |e: Error, history: &[f64]| Error::Diverged { iteration, source: Box::new(e), history: history.to_vec() };
            let (loss, grad) = self.loss_and_grad().map_err(|e| fail(e, &self.history))?;
            self.history.push(loss);
            self.adam.step(&mut self.net.theta, &grad).map_err(|e| fail(e, &self.history))?;
            if iteration.is_multiple_of(1000) {
                log::info!("pinn iteration {iteration}: loss {loss:e}");
            }
        }
        Ok(())
    }
}

impl Refinable for PinnTrainer {
    fn residuals(&self, candidates: &[Point]) -> Vec<f64> {
        candidates.par_iter().map(|pt| pde_residual(&self.net, &self.problem, &pt.x, pt.t).abs()).collect()
    }

    fn add_points(&mut self, points: Vec<Point>) {
        self.points.interior.extend(points);
    }

    fn retrain(&mut self, iterations: usize) -> Result<()> {
        self.train(iterations)
    }

    fn training_len(&self) -> usize {
        self.points.interior.len()
    }
}

/// Trains the PINN for `cfg.iterations` steps.
pub fn train_pinn(p: &ProblemSpec, cfg: &TrainConfig) -> Result<(MlpParams, Vec<f64>)> {
    let mut tr = PinnTrainer::new(p, cfg)?;
    tr.train(cfg.iterations)?;
    Ok((tr.net, tr.history))
}

/// Uniform candidates in D × (0, T] for refinement.
pub fn interior_candidates(p: &ProblemSpec, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(4);
    let mut space = vec![(p.lo, p.hi)];
    space.extend(std::iter::repeat_n(p.transverse_bounds(), p.dim - 1));
    (0..n)
        .map(|_| {
            let x = space.iter().map(|&(a, b)| a + (b - a) * rng.random::<f64>()).collect();
            Point { x, t: p.t_final * (1.0 - rng.random::<f64>()) }
        })
        .collect()
}
