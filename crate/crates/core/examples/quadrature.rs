//! Gauss-Legendre rules and the interface integral of A(u) = −u.

use layerfront::quadrature::gauss_legendre;

fn main() -> layerfront::Result<()> {
    let rule = gauss_legendre(5)?;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        println!("node {x:+.15}  weight {w:.15}");
    }
    let exact = 2.0 / 9.0;
    println!("∫ x^8 on [-1, 1]: {:.3e} error with M = 5", (rule.integrate(-1.0, 1.0, |x| x.powi(8))? - exact).abs());

    let m32 = gauss_legendre(32)?;
    let v = m32.integrate(-10.000469, 4.91691, |u| -u)?;
    println!("∫ -u du over [φ⁻, φ⁺] at the initial front = {v:.4}");
    Ok(())
}
