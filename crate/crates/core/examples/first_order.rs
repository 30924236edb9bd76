//! First-order front correction: RK4 reference and a trained network.

use layerfront::asymptotics::{assemble_u1, solve_h1_rk4, FirstOrder, ScalarPath};
use layerfront::dae::{train_h1, H1Config};
use layerfront::problems::{build_front_oracle, ProblemSpec, Resolution};

fn main() -> layerfront::Result<()> {
    let p = ProblemSpec::ex1d(1e-2);
    let oracle = build_front_oracle(&p, Resolution::default_for(&p))?;
    let fo = FirstOrder::with_matching_k(&p)?;
    let rk4 = solve_h1_rk4(&fo, &oracle, 3000)?;
    let cfg = H1Config { hidden: vec![10; 4], iterations: 2000, n_times: 200, lr: 1e-3, seed: 1234 };
    let run = train_h1(&fo, &oracle, &cfg)?;
    println!("h1 training loss {:.3e}", run.loss());
    for k in 0..=6 {
        let t = 0.05 * k as f64;
        println!("t = {t:.2}  h1 rk4 = {:+.5}  h1 net = {:+.5}", rk4.value(t), run.net.value(t));
    }
    let t = 0.2;
    let h = oracle.h0(&[], t);
    for x in [h - 0.05, h, h + 0.05] {
        println!("U1({x:.4}, {t}) = {:+.5}", assemble_u1(&fo, &oracle, &rk4, x, t)?);
    }
    Ok(())
}
