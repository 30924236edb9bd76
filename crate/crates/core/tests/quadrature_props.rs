mod common;

use proptest::prelude::*;

use layerfront::quadrature::{gauss_legendre, integrate};

use common::gauss_exactness_error;

#[test]
fn exact_on_monomials_up_to_degree_2m_minus_1() {
    for m in 1..=32 {
        let err = gauss_exactness_error(m);
        assert!(err < 1e-12, "M = {m}: {err:e}");
    }
}

#[test]
fn rules_are_symmetric_sorted_and_sum_to_two() {
    for m in 1..=64 {
        let r = gauss_legendre(m).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13, "M = {m}");
        assert!(r.weights.iter().all(|&w| w > 0.0));
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        for i in 0..m {
            assert_eq!(r.nodes[i], -r.nodes[m - 1 - i]);
        }
    }
}

#[test]
fn outer_integral_of_minus_u() {
    let rule = gauss_legendre(8).unwrap();
    let v = integrate(|u| -u, -10.000469, 4.91691, &rule).unwrap();
    let exact = -0.5 * (4.91691f64.powi(2) - 10.000469f64.powi(2));
    assert!((v - exact).abs() < 1e-10);
    assert!((v - 37.9167).abs() < 1e-4);
    let two = gauss_legendre(2).unwrap();
    assert!((integrate(|x| x * x, 0.0, 1.0, &two).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(integrate(|x| x.exp(), 0.7, 0.7, &rule).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn reversing_the_interval_flips_the_sign(a in -5.0f64..5.0, b in -5.0f64..5.0, m in 1usize..=32, c in -3.0f64..3.0) {
        let rule = gauss_legendre(m).unwrap();
        let f = |x: f64| (c * x).sin() + x * x;
        let fwd = integrate(f, a, b, &rule).unwrap();
        let back = integrate(f, b, a, &rule).unwrap();
        prop_assert!((fwd + back).abs() < 1e-13 * fwd.abs().max(1.0));
    }
}
