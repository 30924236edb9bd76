//! Trains the 1D front network and compares it with the classical front.
//!
//! Pass an iteration count to shorten or lengthen training (default 2000).

use layerfront::asymptotics::assemble_u0;
use layerfront::dae::{DaeTrainer, TrainConfig};
use layerfront::metrics::evaluate_run;
use layerfront::problems::{build_front_oracle, ProblemSpec, Resolution};

fn main() -> layerfront::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let iterations = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let p = ProblemSpec::ex1d(1e-2);
    let mut cfg = TrainConfig::new(4, 10, iterations, 1000, 0);
    cfg.seed = 1234;
    let mut tr = DaeTrainer::new(&p, &cfg)?;
    tr.train(iterations)?;
    let oracle = build_front_oracle(&p, Resolution::default_for(&p))?;
    let sup = (0..=300).map(|k| (tr.net.eval(&[], 1e-3 * k as f64) - oracle.h0(&[], 1e-3 * k as f64)).abs()).fold(0.0, f64::max);
    let ev = evaluate_run(&p, |x, t| assemble_u0(&p, &tr.net, x, t), |x, t| assemble_u0(&p, &oracle, x, t), 5000, 1234)?;
    println!("loss {:.3e}, sup front error {sup:.3e}, e2 {:.3e}, e_inf {:.3e}", tr.loss(), ev.report.e2, ev.report.e_inf);
    Ok(())
}
