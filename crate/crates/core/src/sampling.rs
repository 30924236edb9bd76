//! Point generation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A space-time point. `x` holds whichever spatial coordinates the
/// consumer works in (transverse only for the front, full for the PINN).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub t: f64,
}

impl Point {
    /// Splits the trailing coordinate off as time.
    pub fn from_row(mut row: Vec<f64>) -> Self {
        let t = row.pop().expect("row must contain time");
        Point { x: row, t }
    }
}

/// Latin hypercube sample of `n` points in the box `bounds`.
///
/// Each coordinate has exactly one point in each of its `n` equal strata.
pub fn lhs_points(n: usize, bounds: &[(f64, f64)], seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![vec![0.0; bounds.len()]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for (d, &(lo, hi)) in bounds.iter().enumerate() {
        perm.shuffle(&mut rng);
        let width = (hi - lo) / n as f64;
        for (i, &stratum) in perm.iter().enumerate() {
            let u: f64 = rng.random();
            points[i][d] = lo + (stratum as f64 + u) * width;
        }
    }
    points
}

/// Independent uniform points in `bounds`.
pub fn uniform_points(n: usize, bounds: &[(f64, f64)], rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect()).collect()
}
