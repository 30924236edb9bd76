//! Learning the first-order front correction h₁(t).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{FirstOrder, FrontEvaluator, ScalarPath};
use crate::autodiff::{batch_grad, Real, Var};
use crate::error::{Error, Result};
use crate::network::{AdamState, HardIcNet, MlpParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H1Config {
    pub hidden: Vec<usize>,
    pub iterations: usize,
    /// Number of sampled times.
    pub n_times: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_lr() -> f64 {
    1e-3
}

/// ĥ₁(t) = t · net(t).
#[derive(Debug, Clone, PartialEq)]
pub struct H1Net(pub HardIcNet);

impl H1Net {
    pub fn new(net: MlpParams) -> Self {
        H1Net(HardIcNet::new(net, 0.0))
    }
}

impl ScalarPath for H1Net {
    fn value(&self, t: f64) -> f64 {
        self.0.eval(&[], t)
    }
    fn slope(&self, t: f64) -> f64 {
        self.0.eval_jet(&[], t).d1[0]
    }
}

#[derive(Debug, Clone)]
pub struct H1Run {
    pub net: H1Net,
    pub history: Vec<f64>,
    /// (t, a, Φ₁, Φ₂) at the training times.
    pub coefficients: Vec<[f64; 4]>,
}

impl H1Run {
    pub fn loss(&self) -> f64 {
        let n = self.coefficients.len() as f64;
        self.coefficients
            .iter()
            .map(|&[t, a, p1, p2]| {
                let r = a * self.net.slope(t) + p1 * self.net.value(t) - p2;
                r * r / n
            })
            .sum()
    }
}

/// Minimizes the mean squared residual of a·h₁′ + Φ₁h₁ − Φ₂ at sampled
/// times along the zero-order front `h0`.
pub fn train_h1(fo: &FirstOrder, h0: &dyn FrontEvaluator, cfg: &H1Config) -> Result<H1Run> {
    if cfg.iterations == 0 || cfg.n_times == 0 {
        return Err(Error::config("h1", "iterations and n_times must be positive"));
    }
    let t_final = fo.problem().t_final;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2);
    let mut coefficients = Vec::with_capacity(cfg.n_times);
    for _ in 0..cfg.n_times {
        let t = t_final * rng.random::<f64>();
        let fs = h0.front(&[], t);
        let layer = fo.layer(fs.h0, fs.ht.unwrap_or(0.0))?;
        let (a, p1, p2) = fo.ode_coefficients(&layer)?;
        coefficients.push([t, a, p1, p2]);
    }
    let mut sizes = vec![1];
    sizes.extend(&cfg.hidden);
    sizes.push(1);
    let mut net = H1Net::new(MlpParams::init(&sizes, cfg.seed)?);
    let mut adam = AdamState::new(net.0.net.len(), cfg.lr);
    let mut history = Vec::with_capacity(cfg.iterations);
    let n = coefficients.len() as f64;
    for iteration in 0..cfg.iterations {
        let fail = |e: Error, history: &[f64]| Error::Diverged { iteration, source: Box::new(e), history: history.to_vec() };
        let hn = &net.0;
        let (loss, grad) = batch_grad(&hn.net.theta, coefficients.len(), 128, |theta, range| {
            let terms: Vec<Var> = coefficients[range]
                .iter()
                .map(|&[t, a, p1, p2]| {
                    let j = hn.eval_jet_with(theta, &[], t);
                    (j.d1[0] * a + j.value * p1 - p2).square() * (1.0 / n)
                })
                .collect();
            Var::sum(&terms)
        })
        .map_err(|e| fail(e, &history))?;
        history.push(loss);
        adam.step(&mut net.0.net.theta, &grad).map_err(|e| fail(e, &history))?;
    }
    Ok(H1Run { net, history, coefficients })
}
