//! Residual-based adaptive refinement of a briefly trained front network.

use layerfront::dae::{rar_refine, DaeTrainer, RarConfig, TrainConfig};
use layerfront::problems::ProblemSpec;
use layerfront::sampling::{lhs_points, Point};

fn main() -> layerfront::Result<()> {
    let p = ProblemSpec::ex1d(1e-2);
    let mut cfg = TrainConfig::new(4, 10, 500, 100, 0);
    cfg.seed = 7;
    let mut tr = DaeTrainer::new(&p, &cfg)?;
    tr.train(cfg.iterations)?;
    let candidates: Vec<Point> = lhs_points(2000, &[(0.0, p.t_final)], 11).into_iter().map(Point::from_row).collect();
    let rar = RarConfig { candidates: 2000, per_round: 10, tolerance: 1e-6, iterations_per_round: 500, max_rounds: 5 };
    let out = rar_refine(&mut tr, &candidates, &rar)?;
    for (round, r) in out.mean_residuals.iter().enumerate() {
        println!("round {round}: mean |R| over candidates {r:.3e}");
    }
    println!("added {} points, training set now {}", out.added.len(), tr.points.residual.len());
    Ok(())
}
