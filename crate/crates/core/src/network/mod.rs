//! Fully connected tanh networks, Adam, and the hard initial-condition wrapper.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

mod trace;

pub use trace::Trace;

use crate::autodiff::{Jet, Real};
use crate::error::{Error, Result};

/// Weights and biases of a tanh MLP with a linear scalar output.
///
/// Parameters live in one flat vector. Layer `l` contributes its weight matrix
/// (row-major, `sizes[l+1] × sizes[l]`) followed by its bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    sizes: Vec<usize>,
    pub theta: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
}

/// Layer sizes `[input, hidden × depth, 1]`.
pub fn layer_sizes(input: usize, depth: usize, width: usize) -> Vec<usize> {
    let mut sizes = vec![input];
    sizes.extend(std::iter::repeat_n(width, depth));
    sizes.push(1);
    sizes
}

impl MlpParams {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        validate_sizes(sizes)?;
        Ok(MlpParams { sizes: sizes.to_vec(), theta: vec![0.0; param_count(sizes)] })
    }

    /// Xavier-uniform weights and zero biases.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut p = Self::zeros(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut off = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let b = xavier_bound(fan_in, fan_out);
            for x in &mut p.theta[off..off + fan_in * fan_out] {
                *x = rng.random_range(-b..=b);
            }
            off += fan_out * (fan_in + 1);
        }
        Ok(p)
    }

    pub fn from_theta(sizes: &[usize], theta: Vec<f64>) -> Result<Self> {
        validate_sizes(sizes)?;
        if theta.len() != param_count(sizes) {
            return Err(Error::config("theta", format!("expected {} values, got {}", param_count(sizes), theta.len())));
        }
        Ok(MlpParams { sizes: sizes.to_vec(), theta })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    fn offset(&self, layer: usize) -> usize {
        param_count(&self.sizes[..=layer])
    }

    /// Row-major weight matrix of `layer`.
    pub fn weights(&self, layer: usize) -> &[f64] {
        let off = self.offset(layer);
        &self.theta[off..off + self.sizes[layer] * self.sizes[layer + 1]]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let off = self.offset(layer);
        let n = self.sizes[layer] * self.sizes[layer + 1];
        &mut self.theta[off..off + n]
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        let off = self.offset(layer) + self.sizes[layer] * self.sizes[layer + 1];
        &self.theta[off..off + self.sizes[layer + 1]]
    }

    pub fn biases_mut(&mut self, layer: usize) -> &mut [f64] {
        let off = self.offset(layer) + self.sizes[layer] * self.sizes[layer + 1];
        let n = self.sizes[layer + 1];
        &mut self.theta[off..off + n]
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.input_dim() {
            return Err(Error::config("input", format!("expected {} coordinates, got {}", self.input_dim(), input.len())));
        }
        Ok(forward_with(&self.sizes, &self.theta, input))
    }
}

pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(Error::config("layers", "need an input, at least one hidden layer, and an output"));
    }
    if let Some(i) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::config("layers", format!("layer {i} has zero width")));
    }
    if *sizes.last().unwrap() != 1 {
        return Err(Error::config("layers", "output width must be 1"));
    }
    Ok(())
}

/// Network output for parameters and inputs of any [`Real`] type.
pub fn forward_with<T: Real>(sizes: &[usize], theta: &[T], input: &[T]) -> T {
    let mut act: Vec<T> = input.to_vec();
    let mut off = 0;
    let last = sizes.len() - 2;
    for (l, w) in sizes.windows(2).enumerate() {
        let (n_in, n_out) = (w[0], w[1]);
        let bias_off = off + n_in * n_out;
        let next: Vec<T> = (0..n_out)
            .map(|j| {
                let z = T::dot(&theta[off + j * n_in..off + (j + 1) * n_in], &act, theta[bias_off + j]);
                if l == last {
                    z
                } else {
                    z.tanh()
                }
            })
            .collect();
        act = next;
        off = bias_off + n_out;
    }
    act[0]
}

/// Network output as a jet in the inputs. Every input jet must track the same
/// slots.
pub fn forward_jet<T: Real>(sizes: &[usize], theta: &[T], input: &[Jet<T>]) -> Jet<T> {
    let slots = input.iter().map(|j| j.slots()).max().unwrap_or(0);
    let second = input.iter().map(|j| j.second_slots()).max().unwrap_or(0);
    let mut vals: Vec<T> = input.iter().map(|j| j.value).collect();
    let mut d1: Vec<Vec<T>> = (0..slots).map(|s| input.iter().map(|j| j.d1[s]).collect()).collect();
    let mut d2: Vec<Vec<T>> = (0..second).map(|s| input.iter().map(|j| j.d2[s]).collect()).collect();
    let mut off = 0;
    let last = sizes.len() - 2;
    let zero = T::zero();
    let mut out = Jet::lift(zero);
    for (l, w) in sizes.windows(2).enumerate() {
        let (n_in, n_out) = (w[0], w[1]);
        let bias_off = off + n_in * n_out;
        let mut nv = Vec::with_capacity(n_out);
        let mut n1: Vec<Vec<T>> = vec![Vec::with_capacity(n_out); slots];
        let mut n2: Vec<Vec<T>> = vec![Vec::with_capacity(n_out); second];
        let mut z1 = [zero; crate::autodiff::MAX_SLOTS];
        let mut z2 = [zero; crate::autodiff::MAX_SLOTS];
        for j in 0..n_out {
            let row = &theta[off + j * n_in..off + (j + 1) * n_in];
            let z = T::dot(row, &vals, theta[bias_off + j]);
            for s in 0..slots {
                z1[s] = T::dot(row, &d1[s], zero);
            }
            for s in 0..second {
                z2[s] = T::dot(row, &d2[s], zero);
            }
            let mut jet = Jet::from_parts(z, &z1[..slots], &z2[..second]);
            if l != last {
                jet = jet.tanh();
            }
            nv.push(jet.value);
            for s in 0..slots {
                n1[s].push(jet.d1[s]);
            }
            for s in 0..second {
                n2[s].push(jet.d2[s]);
            }
            out = jet;
        }
        vals = nv;
        d1 = n1;
        d2 = n2;
        off = bias_off + n_out;
    }
    out
}

/// Adam optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize, lr: f64) -> Self {
        AdamState { m: vec![0.0; n], v: vec![0.0; n], t: 0, lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    /// One bias-corrected Adam update of `params`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::config("grads", "shape does not match optimizer state"));
        }
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { index });
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// ĥ(x*, t) = h* + t · net(x*, t).
///
/// Inputs to `net` are the transverse coordinates followed by `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardIcNet {
    pub net: MlpParams,
    pub h_star: f64,
}

impl HardIcNet {
    pub fn new(net: MlpParams, h_star: f64) -> Self {
        HardIcNet { net, h_star }
    }

    /// Number of transverse coordinates.
    pub fn transverse_dim(&self) -> usize {
        self.net.input_dim() - 1
    }

    pub fn eval(&self, xstar: &[f64], t: f64) -> f64 {
        self.eval_with(&self.net.theta, xstar, t)
    }

    pub fn eval_with<T: Real>(&self, theta: &[T], xstar: &[f64], t: f64) -> T {
        let mut input: Vec<T> = xstar.iter().map(|&x| T::constant(x)).collect();
        input.push(T::constant(t));
        forward_with(self.net.sizes(), theta, &input) * t + self.h_star
    }

    /// ĥ with first partials: slots `0..d-1` are the transverse coordinates,
    /// slot `d-1` is t.
    pub fn eval_jet(&self, xstar: &[f64], t: f64) -> Jet<f64> {
        self.eval_jet_with(&self.net.theta, xstar, t)
    }

    pub fn eval_jet_with<T: Real>(&self, theta: &[T], xstar: &[f64], t: f64) -> Jet<T> {
        let slots = xstar.len() + 1;
        let mut input: Vec<Jet<T>> =
            xstar.iter().enumerate().map(|(i, &x)| Jet::variable(T::constant(x), i, slots, 0)).collect();
        let tj = Jet::variable(T::constant(t), slots - 1, slots, 0);
        input.push(tj);
        let net = forward_jet(self.net.sizes(), theta, &input);
        tj * net + self.h_star
    }
}

/// Serialized network and optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub layer_sizes: Vec<usize>,
    /// Row-major weight matrix per layer.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_star: Option<f64>,
    pub adam: AdamState,
    pub step: u64,
    pub seed: u64,
}

impl Checkpoint {
    pub fn new(net: &MlpParams, h_star: Option<f64>, adam: &AdamState, seed: u64) -> Self {
        Checkpoint {
            layer_sizes: net.sizes().to_vec(),
            weights: (0..net.layers()).map(|l| net.weights(l).to_vec()).collect(),
            biases: (0..net.layers()).map(|l| net.biases(l).to_vec()).collect(),
            h_star,
            adam: adam.clone(),
            step: adam.t,
            seed,
        }
    }

    pub fn params(&self) -> Result<MlpParams> {
        let mut p = MlpParams::zeros(&self.layer_sizes)?;
        for l in 0..p.layers() {
            let (w, b) = (&self.weights[l], &self.biases[l]);
            if w.len() != p.weights(l).len() || b.len() != p.biases(l).len() {
                return Err(Error::config("checkpoint", format!("layer {l} shape mismatch")));
            }
            p.weights_mut(l).copy_from_slice(w);
            p.biases_mut(l).copy_from_slice(b);
        }
        Ok(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Json { path: path.into(), source: e })?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json { path: path.into(), source: e })
    }
}
