//! Latin hypercube test sets and the error metrics.

use layerfront::metrics::{max_abs, relative_l2};
use layerfront::sampling::lhs_points;

fn main() -> layerfront::Result<()> {
    let pts = lhs_points(8, &[(0.0, 1.0), (0.0, 0.3)], 1234);
    for p in &pts {
        println!("x = {:.4}  t = {:.4}", p[0], p[1]);
    }
    let reference: Vec<f64> = pts.iter().map(|p| (3.0 * p[0]).sin() + 2.0).collect();
    let pred: Vec<f64> = reference.iter().map(|u| u + 1e-3).collect();
    println!("e2 = {:.3e}, e_inf = {:.3e}", relative_l2(&pred, &reference)?, max_abs(&pred, &reference));
    Ok(())
}
