//! Error metrics against a reference solution.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::sampling::lhs_points;

/// e₂ = ‖pred − ref‖ / ‖ref‖.
pub fn relative_l2(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(Error::config("pred", "length differs from reference"));
    }
    let num: f64 = pred.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    if den == 0.0 {
        return Err(Error::UndefinedMetric);
    }
    Ok((num / den).sqrt())
}

/// Largest pointwise |pred − ref|.
pub fn max_abs(pred: &[f64], reference: &[f64]) -> f64 {
    pred.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub e_loss: f64,
    pub e2: f64,
    pub e_inf: f64,
    pub n_test: usize,
    /// Test points where either solution could not be evaluated.
    pub skipped: usize,
    pub wall_seconds: f64,
    pub seed: u64,
    pub config_digest: String,
}

/// One row of the pointwise dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseRow {
    pub x: Vec<f64>,
    pub t: f64,
    pub u_pred: f64,
    pub u_ref: f64,
}

impl PointwiseRow {
    pub fn abs_err(&self) -> f64 {
        (self.u_pred - self.u_ref).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: ErrorReport,
    pub rows: Vec<PointwiseRow>,
}

/// Compares `pred` with `reference` on an LHS test set over the space-time
/// box. `e_loss`, `wall_seconds` and the digest are left for the caller.
pub fn evaluate_run<P, R>(p: &ProblemSpec, pred: P, reference: R, n_test: usize, seed: u64) -> Result<Evaluation>
where
    P: Fn(&[f64], f64) -> Result<f64> + Sync,
    R: Fn(&[f64], f64) -> Result<f64> + Sync,
{
    let start = Instant::now();
    let pts = lhs_points(n_test, &p.space_time_bounds(), seed);
    let evaluated: Vec<Option<PointwiseRow>> = pts
        .par_iter()
        .map(|row| {
            let (x, t) = (&row[..p.dim], row[p.dim]);
            match (pred(x, t), reference(x, t)) {
                (Ok(u_pred), Ok(u_ref)) if u_pred.is_finite() && u_ref.is_finite() => {
                    Some(PointwiseRow { x: x.to_vec(), t, u_pred, u_ref })
                }
                _ => None,
            }
        })
        .collect();
    let skipped = evaluated.iter().filter(|r| r.is_none()).count();
    if skipped > 0 {
        log::warn!("{skipped} test points skipped");
    }
    let rows: Vec<PointwiseRow> = evaluated.into_iter().flatten().collect();
    let up: Vec<f64> = rows.iter().map(|r| r.u_pred).collect();
    let ur: Vec<f64> = rows.iter().map(|r| r.u_ref).collect();
    let report = ErrorReport {
        e2: relative_l2(&up, &ur)?,
        e_inf: max_abs(&up, &ur),
        n_test,
        skipped,
        wall_seconds: start.elapsed().as_secs_f64(),
        seed,
        ..Default::default()
    };
    Ok(Evaluation { report, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_values() {
        let r = vec![3.0; 10];
        let p: Vec<f64> = r.iter().map(|v| v + 1.0).collect();
        assert!((relative_l2(&p, &r).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(relative_l2(&[2.0, 4.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert!(matches!(relative_l2(&[1.0], &[0.0]), Err(Error::UndefinedMetric)));
        assert_eq!(max_abs(&[1.0, 2.5, 3.0], &[1.0, 2.0, 3.0]), 0.5);
    }
}
