//! Reverse mode on a tape and second-order forward jets.

use layerfront::autodiff::{jet_eval, record_and_grad, Jet, Real};

fn main() -> layerfront::Result<()> {
    // f(x, y) = tanh(x·y) + exp(y) / sqrt(x² + 1)
    let (value, grad) = record_and_grad(&[0.3, -1.1], |v| (v[0] * v[1]).tanh() + v[1].exp() / (v[0] * v[0] + 1.0).sqrt())?;
    println!("reverse mode: f = {value:.6}, grad = [{:.6}, {:.6}]", grad[0], grad[1]);

    let jet = jet_eval(
        |v: &[Jet<f64>]| (v[0] * v[1]).tanh() + v[1].exp() / (v[0] * v[0] + 1.0).sqrt(),
        &[Jet::variable(0.3, 0, 2, 2), Jet::variable(-1.1, 1, 2, 2)],
    )?;
    println!("forward jet:  f = {:.6}, grad = [{:.6}, {:.6}]", jet.value, jet.d1[0], jet.d1[1]);
    println!("              diagonal Hessian = [{:.6}, {:.6}], Laplacian = {:.6}", jet.d2[0], jet.d2[1], jet.laplacian());
    Ok(())
}
