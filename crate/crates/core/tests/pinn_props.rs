mod common;

use proptest::prelude::*;

use layerfront::asymptotics::assemble_u0;
use layerfront::autodiff::Jet;
use layerfront::dae::TrainConfig;
use layerfront::network::MlpParams;
use layerfront::pinn::{pde_residual, pde_residual_from_jet, pinn_loss, pinn_loss_grad, pinn_loss_grad_tape, PinnPointSets, PinnTrainer};
use layerfront::problems::{ProblemSpec, Source};
use layerfront::sampling::Point;

use common::{oracle_1d, random_net};

fn constant_net(sizes: &[usize], c: f64) -> MlpParams {
    let mut net = MlpParams::zeros(sizes).unwrap();
    let last = net.layers() - 1;
    net.biases_mut(last)[0] = c;
    net
}

#[test]
fn constant_field_leaves_minus_the_source() {
    for p in [ProblemSpec::ex1d(1e-2), ProblemSpec::ex2d(1e-2), ProblemSpec::ex3d(1e-2)] {
        let net = constant_net(&[p.dim + 1, 4, 1], 2.5);
        let x: Vec<f64> = (0..p.dim).map(|i| 0.2 + 0.1 * i as f64).collect();
        assert_eq!(pde_residual(&net, &p, &x, 0.3), -p.source_value(&x));
    }
}

#[test]
fn linear_field_residual() {
    let p = ProblemSpec::ex1d(1e-2);
    for x in [0.0, 0.3, 1.0] {
        let jet = Jet::<f64>::variable(x, 0, 2, 1);
        let r = pde_residual_from_jet(&p, &jet, &[x]);
        assert!((r - (x - p.source_value(&[x]))).abs() < 1e-15);
    }
    let jet = Jet::<f64>::variable(1.0, 0, 2, 1);
    assert_eq!(pde_residual_from_jet(&p, &jet, &[1.0]), 0.0);
}

#[test]
fn zero_field_boundary_term() {
    let p = ProblemSpec::ex1d(1e-2);
    let net = MlpParams::zeros(&[2, 4, 1]).unwrap();
    let sets = PinnPointSets { boundary: vec![Point { x: vec![], t: 0.2 }], ..Default::default() };
    assert_eq!(pinn_loss(&net, &p, &sets, [1.0; 3]), 125.0);
}

#[test]
fn initial_term_vanishes_on_the_initial_data() {
    let p = ProblemSpec::ex1d(1e-2);
    let net = constant_net(&[2, 4, 1], 5.0);
    let sets = PinnPointSets { initial: vec![Point { x: vec![1.0], t: 0.0 }, Point { x: vec![0.95], t: 0.0 }], ..Default::default() };
    assert_eq!(pinn_loss(&net, &p, &sets, [1.0; 3]), 0.0);
}

#[test]
fn composite_loss_matches_hand_sum() {
    let p = ProblemSpec::ex2d(1e-2);
    let net = random_net(&[3, 6, 6, 1], 17);
    let f = |x: f64, y: f64, t: f64| net.forward(&[x, y, t]).unwrap();
    let sets = PinnPointSets {
        interior: vec![Point { x: vec![0.3, -1.1], t: 0.4 }],
        boundary: vec![Point { x: vec![0.7], t: 0.9 }],
        periodic: vec![Point { x: vec![-0.5, -1.6], t: 0.25 }],
        initial: vec![Point { x: vec![1.2, 0.4], t: 0.0 }],
    };
    let pde = pde_residual(&net, &p, &[0.3, -1.1], 0.4).powi(2);
    let bc = (f(p.lo, 0.7, 0.9) - p.left).powi(2) + (f(p.hi, 0.7, 0.9) - p.right).powi(2);
    let per = (f(-0.5, -1.6 + p.period, 0.25) - f(-0.5, -1.6, 0.25)).powi(2);
    let ic = (f(1.2, 0.4, 0.0) - p.initial_profile(&[1.2, 0.4])).powi(2);
    let hand = pde + bc + per + ic;
    let loss = pinn_loss(&net, &p, &sets, [1.0; 3]);
    assert!((loss - hand).abs() < 1e-12 * hand.max(1.0));
    let (fast, g) = pinn_loss_grad(&net, &p, &sets, [1.0; 3], 2).unwrap();
    let (slow, g2) = pinn_loss_grad_tape(&net, &p, &sets, [1.0; 3]).unwrap();
    assert!((fast - loss).abs() < 1e-12 * hand.max(1.0) && (slow - loss).abs() < 1e-12 * hand.max(1.0));
    for (a, b) in g.iter().zip(&g2) {
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
    }
}

#[test]
fn training_is_deterministic() {
    let p = ProblemSpec::ex1d(1e-2);
    let mut cfg = TrainConfig::new(2, 6, 15, 30, 0);
    cfg.n_boundary = 10;
    cfg.n_initial = 10;
    let run = || {
        let mut tr = PinnTrainer::new(&p, &cfg).unwrap();
        tr.train(cfg.iterations).unwrap();
        (tr.history, tr.net)
    };
    let (h1, n1) = run();
    let (h2, n2) = run();
    assert_eq!(h1, h2);
    assert_eq!(n1, n2);
    assert!(h1.last().unwrap() < &h1[0]);
}

#[test]
fn asymptotic_solution_nearly_solves_the_pde_away_from_the_layer() {
    let (p, o) = oracle_1d(1e-2);
    let u = |x: f64, t: f64| assemble_u0(&p, &o, &[x], t).unwrap();
    let (hx, ht) = (1e-3, 1e-5);
    let strip = 10.0 * p.mu * p.mu.ln().abs();
    let mut total = 0.0;
    let mut n = 0;
    let mut k = 0;
    while n < 200 {
        k += 1;
        let x = 0.01 + 0.98 * ((k as f64 * 0.618034).fract());
        let t = 0.01 + 0.28 * ((k as f64 * 0.414214).fract());
        if (x - o.h0(&[], t)).abs() < strip {
            continue;
        }
        let uxx = (u(x + hx, t) - 2.0 * u(x, t) + u(x - hx, t)) / (hx * hx);
        let ux = (u(x + hx, t) - u(x - hx, t)) / (2.0 * hx);
        let ut = (u(x, t + ht) - u(x, t - ht)) / (2.0 * ht);
        let v = u(x, t);
        total += (p.mu * uxx - ut - p.advection.eval(v) * ux - p.source_value(&[x])).abs();
        n += 1;
    }
    let mean = total / f64::from(n);
    assert!(mean < 0.5, "{mean}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn residual_is_affine_in_the_source(seed in 0u64..1000, x in 0.0f64..1.0, t in 0.0f64..0.3, delta in -3.0f64..3.0) {
        let p = ProblemSpec::ex1d(1e-2);
        let mut q = p.clone();
        if let Source::Polynomial { coeffs } = &mut q.source {
            coeffs[0] += delta;
        }
        let net = random_net(&[2, 5, 5, 1], seed);
        let a = pde_residual(&net, &p, &[x], t);
        let b = pde_residual(&net, &q, &[x], t);
        prop_assert!((b - (a - delta)).abs() < 1e-12 * (1.0 + a.abs()));
    }
}
