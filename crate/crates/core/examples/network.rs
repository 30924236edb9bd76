//! MLP construction, the hard initial-condition front network, Adam and
//! checkpoints.

use layerfront::network::{AdamState, Checkpoint, HardIcNet, MlpParams};

fn main() -> layerfront::Result<()> {
    let net = MlpParams::init(&[2, 10, 10, 1], 1234)?;
    println!("{} parameters, layers {:?}", net.len(), net.sizes());
    println!("net(0.5, 0.1) = {:.6}", net.forward(&[0.5, 0.1])?);

    // ĥ(y, t) = h* + t·net(y, t)
    let front = HardIcNet::new(net.clone(), 0.1);
    let jet = front.eval_jet(&[0.5], 0.2);
    println!("front at t = 0: {}, at t = 0.2: {:.6} (dy {:.4}, dt {:.4})", front.eval(&[0.5], 0.0), jet.value, jet.d1[0], jet.d1[1]);

    let mut theta = net.theta.clone();
    let mut adam = AdamState::new(theta.len(), 1e-3);
    let grad: Vec<f64> = theta.iter().map(|w| 2.0 * w).collect();
    adam.step(&mut theta, &grad)?;
    let moved = theta.iter().zip(&net.theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("one Adam step on |θ|² moved each weight by at most {moved:.2e}");

    let dir = std::env::temp_dir().join("layerfront-network-example");
    std::fs::create_dir_all(&dir).expect("temp dir is writable");
    let path = dir.join("checkpoint.json");
    Checkpoint::new(&net, Some(0.1), &adam, 1234).save(&path)?;
    let back = Checkpoint::load(&path)?.params()?;
    println!("checkpoint {} restores identical weights: {}", path.display(), back == net);
    Ok(())
}
