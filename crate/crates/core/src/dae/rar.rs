//! Residual-based adaptive refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::Point;

/// A trainable model whose training set can be grown.
pub trait Refinable {
    /// |residual| at each candidate.
    fn residuals(&self, candidates: &[Point]) -> Vec<f64>;
    fn add_points(&mut self, points: Vec<Point>);
    fn retrain(&mut self, iterations: usize) -> Result<()>;
    fn training_len(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RarConfig {
    /// Candidate set size |S|.
    pub candidates: usize,
    /// Points added per round (m).
    pub per_round: usize,
    /// Stop once the mean candidate residual drops below this.
    pub tolerance: f64,
    pub iterations_per_round: usize,
    pub max_rounds: usize,
}

impl RarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.per_round == 0 || self.per_round > self.candidates {
            return Err(Error::config("rar.per_round", "must be in 1..=candidates"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("rar.tolerance", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RarOutcome {
    pub rounds: usize,
    pub added: Vec<Point>,
    /// Mean |R| over the candidates before each round and after the last.
    pub mean_residuals: Vec<f64>,
    pub converged: bool,
}

/// Indices of the `m` largest values, largest first; ties go to the lower
/// index and entries flagged in `skip` are never chosen.
pub fn top_m(values: &[f64], skip: &[bool], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| !skip.get(i).copied().unwrap_or(false)).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(m);
    idx
}

/// Adds the worst candidates to the training set and retrains (warm start)
/// until the mean candidate residual falls below the tolerance.
pub fn rar_refine<R: Refinable>(model: &mut R, candidates: &[Point], cfg: &RarConfig) -> Result<RarOutcome> {
    cfg.validate()?;
    let mut used = vec![false; candidates.len()];
    let mut out = RarOutcome::default();
    loop {
        let r = model.residuals(candidates);
        let mean = r.iter().sum::<f64>() / r.len().max(1) as f64;
        out.mean_residuals.push(mean);
        log::info!("rar round {}: mean residual {mean:e}, training points {}", out.rounds, model.training_len());
        if mean < cfg.tolerance {
            out.converged = true;
            return Ok(out);
        }
        if out.rounds == cfg.max_rounds {
            log::warn!("rar stopped after {} rounds with mean residual {mean:e}", out.rounds);
            return Ok(out);
        }
        let pick = top_m(&r, &used, cfg.per_round);
        if pick.is_empty() {
            return Ok(out);
        }
        let new: Vec<Point> = pick.iter().map(|&i| candidates[i].clone()).collect();
        for &i in &pick {
            used[i] = true;
        }
        out.added.extend(new.iter().cloned());
        model.add_points(new);
        model.retrain(cfg.iterations_per_round)?;
        out.rounds += 1;
    }
}
