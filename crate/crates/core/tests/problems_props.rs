mod common;

use proptest::prelude::*;

use layerfront::asymptotics::FrontEvaluator;
use layerfront::problems::{assumption_check, build_front_oracle, ProblemSpec, Resolution, Side};
use layerfront::quadrature::gauss_legendre;

use common::{oracle_1d, oracle_residual_max};

#[test]
fn boundary_identities() {
    for key in ["ex1d", "ex2d", "ex3d"] {
        let p = ProblemSpec::by_key(key, 1e-2).unwrap();
        for y in [-0.9, -0.3, 0.0, 0.45, 0.8] {
            let xs = vec![y; p.dim - 1];
            let lx: Vec<f64> = std::iter::once(p.lo).chain(xs.iter().copied()).collect();
            let rx: Vec<f64> = std::iter::once(p.hi).chain(xs.iter().copied()).collect();
            assert!((p.outer_value(Side::Minus, &lx).unwrap() - p.left).abs() < 1e-10, "{key}");
            assert!((p.outer_value(Side::Plus, &rx).unwrap() - p.right).abs() < 1e-10, "{key}");
        }
    }
}

#[test]
fn one_d_closed_forms() {
    let p = ProblemSpec::ex1d(1e-2);
    assert_eq!(p.outer_value(Side::Minus, &[0.0]).unwrap(), -10.0);
    assert_eq!(p.outer_value(Side::Plus, &[1.0]).unwrap(), 5.0);
    let phi = p.outer_value(Side::Plus, &[0.1]).unwrap();
    assert!((phi - 4.91691).abs() < 1e-5);
    // φ⁺(x)² = 25 − 2∫ₓ¹ f, f = s − s² + s³.
    let anti = |s: f64| s * s / 2.0 - s.powi(3) / 3.0 + s.powi(4) / 4.0;
    assert!((phi * phi - (25.0 - 2.0 * (anti(1.0) - anti(0.1)))).abs() < 1e-12);
    for i in 0..100 {
        let x = 0.005 + 0.0099 * i as f64;
        for side in [Side::Minus, Side::Plus] {
            let (v, d1, _) = p.outer_derivs_1d(side, x).unwrap();
            assert!((v * d1 - p.source_value(&[x])).abs() < 1e-8);
            let h = 1e-6;
            let fd = (p.outer_value(side, &[x + h]).unwrap().powi(2) - p.outer_value(side, &[x - h]).unwrap().powi(2)) / (4.0 * h);
            assert!((fd - p.source_value(&[x])).abs() < 1e-6);
        }
    }
    assert_eq!(p.source_value(&[0.0]), 0.0);
    assert_eq!(p.source_value(&[1.0]), 1.0);
    assert_eq!(ProblemSpec::ex2d(1e-2).source_value(&[0.0, 0.0]), 1.0);
    assert_eq!(p.initial_profile(&[0.1]), -2.5);
    assert!((ProblemSpec::ex1d(1e-4).initial_profile(&[1.0]) - 5.0).abs() < 1e-12);
    assert_eq!(ProblemSpec::ex2d(1e-2).initial_profile(&[0.0, 0.0]), -1.0);
}

#[test]
fn three_d_outer_quadrature_converges() {
    let p = ProblemSpec::ex3d(1e-2);
    let (r32, r48) = (gauss_legendre(32).unwrap(), gauss_legendre(48).unwrap());
    for x in [[-0.5, 0.2, -0.7], [0.3, 0.9, 0.1], [0.9, -0.4, 0.6]] {
        for side in [Side::Minus, Side::Plus] {
            let a = p.outer_value_quadrature(side, &x, &r32).unwrap();
            let b = p.outer_value_quadrature(side, &x, &r48).unwrap();
            assert!((a - b).abs() < 1e-10);
            assert!((a - p.outer_value(side, &x).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn one_d_oracle_is_increasing_and_matches_its_ode() {
    let (p, o) = oracle_1d(1e-2);
    assert_eq!(o.h0(&[], 0.0), 0.1);
    let (m, pl) = p.outer_pair(0.1, &[]).unwrap();
    let slope0 = -0.5 * (m + pl);
    assert!((slope0 - 2.54178).abs() < 1e-5);
    assert!((o.front(&[], 0.0).ht.unwrap() - slope0).abs() < 1e-9);
    let hs: Vec<f64> = (0..=300).map(|i| o.h0(&[], i as f64 * 1e-3)).collect();
    assert!(hs.windows(2).all(|w| w[1] > w[0]));
    assert!(o.richardson_delta < 1e-7);
    assert!(oracle_residual_max(&p, &o, 50, 7) < 1e-6);
}

#[test]
fn two_d_oracle_is_periodic_and_solves_the_interface_equation() {
    let p = ProblemSpec::ex2d(1e-2);
    let o = build_front_oracle(&p, Resolution::default_for(&p)).unwrap();
    for y in [-1.7, -0.4, 0.25, 1.3] {
        assert_eq!(o.h0(&[y], 0.0), 0.0);
        for t in [0.2, 0.6, 1.0] {
            assert!((o.h0(&[y], t) - o.h0(&[y + 4.0], t)).abs() < 1e-9);
        }
    }
    assert!(o.richardson_delta < 1e-10);
    assert!(oracle_residual_max(&p, &o, 50, 8) < 1e-6);
    assert!(assumption_check(&p, &o, 500).ok());
}

#[test]
fn three_d_oracle_solves_the_interface_equation() {
    let p = ProblemSpec::ex3d(1e-2);
    let o = build_front_oracle(&p, Resolution::default_for(&p)).unwrap();
    assert_eq!(o.h0(&[0.3, -0.6], 0.0), p.h_star);
    assert!((o.h0(&[0.3, -0.6], 0.4) - o.h0(&[2.3, 1.4], 0.4)).abs() < 1e-9);
    assert!(o.richardson_delta < 1e-10);
    assert!(oracle_residual_max(&p, &o, 30, 9) < 1e-6);
}

#[test]
fn assumptions_hold_along_the_oracle() {
    let (p, o) = oracle_1d(1e-2);
    let report = assumption_check(&p, &o, 1000);
    assert!(report.ok(), "{:?}", report.violations.first());
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        let m = p.outer_value(Side::Minus, &[x]).unwrap();
        assert!(m < 0.0 && p.advection.eval(m) > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outer_solutions_are_ordered(x in 0.0f64..1.0, y in -2.0f64..2.0, z in -1.0f64..1.0, w in -1.0f64..1.0) {
        let p1 = ProblemSpec::ex1d(1e-2);
        let (a, b) = p1.outer_pair(x, &[]).unwrap();
        prop_assert!(a < 0.0 && b > 0.0);
        let p2 = ProblemSpec::ex2d(1e-2);
        let (a, b) = p2.outer_pair(4.0 * x - 2.0, &[y]).unwrap();
        prop_assert!(b - a > 0.0);
        let p3 = ProblemSpec::ex3d(1e-2);
        let (a, b) = p3.outer_pair(2.0 * x - 1.0, &[z, w]).unwrap();
        prop_assert!(b - a > 0.0);
    }
}
