//! Classical front solutions for the three benchmarks.

use layerfront::asymptotics::FrontEvaluator;
use layerfront::problems::{build_front_oracle, ProblemSpec, Resolution};

fn main() -> layerfront::Result<()> {
    let p = ProblemSpec::ex1d(1e-2);
    let o = build_front_oracle(&p, Resolution::default_for(&p))?;
    println!("1D (step-halving change {:.1e})", o.richardson_delta);
    for k in 0..=6 {
        let t = 0.05 * k as f64;
        let f = o.front(&[], t);
        println!("  t = {t:.2}  h0 = {:.6}  dh0/dt = {:.6}", f.h0, f.ht.unwrap());
    }

    let p = ProblemSpec::ex2d(1e-2);
    let o = build_front_oracle(&p, Resolution::default_for(&p))?;
    println!("2D at t = 1");
    for y in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let f = o.evaluate(&[y], 1.0)?;
        println!("  y = {y:+.1}  h0 = {:.6}  dh0/dy = {:+.6}", f.h0, f.grad[0]);
    }

    let p = ProblemSpec::ex3d(1e-2);
    let o = build_front_oracle(&p, Resolution::default_for(&p))?;
    println!("3D at (y, z) = (0, 0): h0(T) = {:.6}", o.h0(&[0.0, 0.0], p.t_final));
    Ok(())
}
