//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line.
//!
//! The trained runs are slow (tens of minutes in total on one core); their
//! artifacts are kept under the cargo target tmp directory.

mod common;

use std::io::Write;
use std::path::PathBuf;
use std::sync::OnceLock;

use layerfront::asymptotics::{solve_h1_rk4, FirstOrder, FrontEvaluator, ScalarPath};
use layerfront::config::preset;
use layerfront::problems::{build_front_oracle, FrontOracle, ProblemSpec, Resolution, Side};
use layerfront::run::{run, RunOutput};

use common::{
    fd_param_gradient_error, gauss_exactness_error, layer_width, lhs_stratified, oracle_residual_max, outside_strip_sup,
    q0_general_gap, q0_matching_and_decay, random_net,
};

fn out_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}

fn verdict(criterion: &str, ok: bool, detail: String) {
    let line = format!("criterion {criterion}: {} {detail}\n", if ok { "PASS" } else { "FAIL" });
    // Written to the raw handle so the line shows up without --nocapture.
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn run_preset(name: &str) -> RunOutput {
    let cfg = preset(name).unwrap();
    run(&cfg, &out_dir(&name.replace('@', "_mu"))).unwrap()
}

fn dae_1d() -> &'static RunOutput {
    static RUN: OnceLock<RunOutput> = OnceLock::new();
    RUN.get_or_init(|| run_preset("ex1d-dae"))
}

fn oracle_1d() -> (ProblemSpec, FrontOracle) {
    let p = ProblemSpec::ex1d(1e-2);
    let o = build_front_oracle(&p, Resolution::default_for(&p)).unwrap();
    (p, o)
}

#[test]
fn criterion_1_one_d_dae() {
    let r = dae_1d();
    let (e2, e_loss) = (r.report.e2, r.report.e_loss);
    verdict(
        "1 (1D DAE)",
        e2 <= 1e-3 && e_loss <= 1e-6 && r.report.skipped == 0,
        format!("e2 = {e2:.3e} (<= 1e-3), e_loss = {e_loss:.3e} (<= 1e-6), wall {:.0}s", r.report.wall_seconds),
    );
}

#[test]
fn criterion_2_mu_independence() {
    let base = dae_1d();
    let a = run_preset("ex1d-dae@1e-3");
    let b = run_preset("ex1d-dae@1e-4");
    let same = base.history == a.history && base.history == b.history;
    verdict(
        "2 (mu independence)",
        same && b.report.e2 <= 1e-2,
        format!(
            "histories identical: {same}; e2 at mu = 1e-2, 1e-3, 1e-4: {:.3e}, {:.3e}, {:.3e} (<= 1e-2 at 1e-4)",
            base.report.e2, a.report.e2, b.report.e2
        ),
    );
}

#[test]
fn criterion_3_rar() {
    let base = dae_1d().report.e2;
    let r = run_preset("ex1d-dae-rar");
    let rar = r.manifest.rar.as_ref().unwrap();
    let gain = base / r.report.e2;
    verdict(
        "3 (RAR)",
        gain >= 10.0,
        format!("e2 {base:.3e} -> {:.3e}, gain {gain:.1}x (>= 10x), {} rounds, {} points added", r.report.e2, rar.rounds, rar.added),
    );
}

#[test]
fn criterion_4_front_accuracy() {
    let (_, oracle) = oracle_1d();
    let net = dae_1d().front.as_ref().unwrap();
    let sup = (0..=300).map(|k| (net.eval(&[], 1e-3 * k as f64) - oracle.h0(&[], 1e-3 * k as f64)).abs()).fold(0.0, f64::max);
    verdict("4 (front accuracy)", sup <= 1e-3, format!("sup |h_net - h_oracle| = {sup:.3e} (<= 1e-3)"));
}

#[test]
fn criterion_5_pinn_baseline() {
    let dae = dae_1d();
    let pinn = run_preset("ex1d-pinn");
    let same_set = (dae.report.n_test, dae.report.seed) == (pinn.report.n_test, pinn.report.seed);
    let ratio = pinn.report.e2 / dae.report.e2;
    verdict(
        "5 (PINN baseline)",
        same_set && pinn.report.e2 >= 0.1 && ratio >= 50.0,
        format!("PINN e2 = {:.3e} (>= 0.1), PINN/DAE ratio = {ratio:.1} (>= 50), same test set: {same_set}", pinn.report.e2),
    );
}

#[test]
fn criterion_6_two_d() {
    let r = run_preset("ex2d-dae");
    verdict(
        "6 (2D DAE)",
        r.report.e2 <= 5e-2 && r.report.skipped == 0,
        format!("e2 = {:.3e} (<= 5e-2), wall {:.0}s", r.report.e2, r.report.wall_seconds),
    );
}

#[test]
#[ignore = "extended target, about 35 minutes on one core"]
fn criterion_6_three_d_extended() {
    let r = run_preset("ex3d-dae");
    verdict(
        "6 (3D DAE, extended)",
        r.report.e2 <= 5e-2 && r.report.skipped == 0,
        format!("e2 = {:.3e} (<= 5e-2), wall {:.0}s", r.report.e2, r.report.wall_seconds),
    );
}

#[test]
fn criterion_7_first_order() {
    let dae = dae_1d();
    let r = run_preset("ex1d-dae1");
    let front = r.front.as_ref().unwrap();
    let h1 = r.h1.as_ref().unwrap();
    let p = ProblemSpec::ex1d(1e-2);
    let fo = FirstOrder::with_matching_k(&p).unwrap();
    let rk4 = solve_h1_rk4(&fo, front, 3000).unwrap();
    let times: Vec<f64> = (0..=300).map(|k| 1e-3 * k as f64).collect();
    let deviation = times.iter().map(|&t| (h1.value(t) - rk4.value(t)).abs()).fold(0.0, f64::max);
    // The identity holds for any h₁ solving its equation; with the network
    // h₁ the gap is dominated by the training residual instead.
    let matching_gap = |path: &dyn ScalarPath| {
        let mut worst: f64 = 0.0;
        for &t in times.iter().step_by(10) {
            let fs = front.front(&[], t);
            let layer = fo.layer(fs.h0, fs.ht.unwrap()).unwrap();
            let ctx = fo.q1_context(&layer, path.value(t), path.slope(t)).unwrap();
            let left = layer.dphi_m + ctx.slope_at_zero(Side::Minus);
            let right = layer.dphi_p + ctx.slope_at_zero(Side::Plus);
            worst = worst.max((left - right).abs());
        }
        worst
    };
    let matching = matching_gap(&rk4);
    let matching_net = matching_gap(h1);
    let h1_at_0 = h1.value(0.0);
    let gap = (r.report.e2 - dae.report.e2).abs();
    verdict(
        "7 (first order)",
        h1_at_0 == 0.0 && deviation <= 1e-2 && matching <= 1e-5 && gap <= 5e-4,
        format!(
            "h1(0) = {h1_at_0:e}, sup |h1_net - h1_rk4| = {deviation:.3e} (<= 1e-2), C1 matching gap = {matching:.3e} (<= 1e-5; \
             {matching_net:.3e} with the network h1), |e2(DAE1) - e2(DAE)| = |{:.3e} - {:.3e}| = {gap:.3e} (<= 5e-4)",
            r.report.e2, dae.report.e2
        ),
    );
}

#[test]
fn criterion_8_properties() {
    let ad = (0..100u64)
        .map(|seed| {
            let net = random_net(&[2, 6, 5, 1], seed);
            fd_param_gradient_error(&net, &[vec![0.3, -0.2], vec![-0.7, 0.9], vec![0.05, 0.4]])
        })
        .fold(0.0, f64::max);
    let gauss = (1..=32).map(gauss_exactness_error).fold(0.0, f64::max);
    let (q0_match, q0_decay) = q0_matching_and_decay();
    let q0_gap = q0_general_gap();
    let (p1, o1) = oracle_1d();
    let p2 = ProblemSpec::ex2d(1e-2);
    let o2 = build_front_oracle(&p2, Resolution::default_for(&p2)).unwrap();
    let p3 = ProblemSpec::ex3d(1e-2);
    let o3 = build_front_oracle(&p3, Resolution::default_for(&p3)).unwrap();
    let residual = oracle_residual_max(&p1, &o1, 200, 1).max(oracle_residual_max(&p2, &o2, 200, 2)).max(oracle_residual_max(&p3, &o3, 100, 3));
    let widths = [layer_width(1e-2), layer_width(1e-3), layer_width(1e-4)];
    let expect = |a: f64, b: f64| (a * a.ln()) / (b * b.ln());
    let width_err = ((widths[0] / widths[1]) / expect(1e-2, 1e-3) - 1.0).abs().max(((widths[1] / widths[2]) / expect(1e-3, 1e-4) - 1.0).abs());
    let lhs = lhs_stratified(1000, &[(0.0, 1.0), (-2.0, 2.0), (0.0, 1.0)], 1234);
    let sups = [outside_strip_sup(1e-2), outside_strip_sup(1e-3), outside_strip_sup(1e-4)];
    let decreasing = sups[2] > 0.0 && sups[1] <= 0.1 * sups[0] && sups[2] <= 0.1 * sups[1];
    let metrics = layerfront::metrics::relative_l2(&[4.0; 10], &[3.0; 10]).unwrap() == 1.0 / 3.0
        && layerfront::metrics::max_abs(&[1.0, 2.5], &[1.0, 2.0]) == 0.5;
    let ok = ad < 1e-5
        && gauss < 1e-12
        && q0_match < 1e-12
        && q0_decay
        && q0_gap < 1e-8
        && residual < 1e-6
        && width_err <= 0.3
        && lhs
        && decreasing
        && metrics;
    verdict(
        "8 (property suites)",
        ok,
        format!(
            "autodiff-vs-FD {ad:.1e}, Gauss exactness {gauss:.1e}, Q0 matching {q0_match:.1e} decay {q0_decay}, \
             profile gap {q0_gap:.1e}, oracle residual {residual:.1e}, width scaling error {:.0}%, LHS {lhs}, \
             outside-strip sup {:.1e} > {:.1e} > {:.1e}, metrics {metrics}",
            100.0 * width_err, sups[0], sups[1], sups[2]
        ),
    );
}
