//! Short run of the full-field PINN baseline on the 1D problem.

use layerfront::asymptotics::assemble_u0;
use layerfront::dae::TrainConfig;
use layerfront::metrics::evaluate_run;
use layerfront::pinn::PinnTrainer;
use layerfront::problems::{build_front_oracle, ProblemSpec, Resolution};

fn main() -> layerfront::Result<()> {
    let iterations = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let p = ProblemSpec::ex1d(1e-2);
    let mut cfg = TrainConfig::new(4, 10, iterations, 2000, 0);
    cfg.n_boundary = 2000;
    cfg.n_initial = 2000;
    let mut tr = PinnTrainer::new(&p, &cfg)?;
    tr.train(iterations)?;
    let oracle = build_front_oracle(&p, Resolution::default_for(&p))?;
    let net = &tr.net;
    let ev = evaluate_run(&p, |x, t| net.forward(&[x[0], t]), |x, t| assemble_u0(&p, &oracle, x, t), 5000, 1234)?;
    println!("loss {:.3e} -> {:.3e}, e2 {:.3e}", tr.history[0], tr.history.last().unwrap(), ev.report.e2);
    Ok(())
}
