//! Zero-order asymptotic solution across the moving layer for several μ.

use layerfront::asymptotics::assemble_u0;
use layerfront::problems::{build_front_oracle, ProblemSpec, Resolution};

fn main() -> layerfront::Result<()> {
    let t = 0.15;
    for mu in [1e-2, 1e-3, 1e-4] {
        let p = ProblemSpec::ex1d(mu);
        let o = build_front_oracle(&p, Resolution::default_for(&p))?;
        let h = o.h0(&[], t);
        print!("mu = {mu:.0e}, front at {h:.5}:");
        for k in -3..=3 {
            let x = h + 5.0 * mu * k as f64;
            print!(" {:+.3}", assemble_u0(&p, &o, &[x], t)?);
        }
        println!();
    }
    Ok(())
}
