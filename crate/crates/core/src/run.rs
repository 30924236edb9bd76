//! Orchestration of runs and their artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{assemble_u0, assemble_u1, FirstOrder, FrontEvaluator};
use crate::config::{Method, RunConfig};
use crate::dae::{rar_refine, train_h1, DaeTrainer, H1Net, RarOutcome};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_run, ErrorReport, PointwiseRow};
use crate::network::{Checkpoint, HardIcNet};
use crate::pinn::{interior_candidates, PinnTrainer};
use crate::problems::{build_front_oracle, FrontOracle, ProblemSpec, Resolution};
use crate::sampling::Point;

/// Summary written next to the other artifacts of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub digest: String,
    pub seed: u64,
    pub final_loss: f64,
    pub e2: f64,
    pub e_inf: f64,
    pub wall_seconds: f64,
    pub n_test: usize,
    pub skipped: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rar: Option<RarSummary>,
    /// Set when training stopped early on a non-finite loss or gradient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RarSummary {
    pub rounds: usize,
    pub added: usize,
    pub converged: bool,
    pub mean_residuals: Vec<f64>,
}

impl From<&RarOutcome> for RarSummary {
    fn from(o: &RarOutcome) -> Self {
        RarSummary { rounds: o.rounds, added: o.added.len(), converged: o.converged, mean_residuals: o.mean_residuals.clone() }
    }
}

pub const MANIFEST: &str = "manifest.json";
pub const LOSS_HISTORY: &str = "loss_history.csv";
pub const CHECKPOINT: &str = "checkpoint.json";
pub const POINTWISE: &str = "pointwise.csv";
pub const TRAJECTORY: &str = "h0_trajectory.csv";
pub const REPORT: &str = "report.json";

/// Everything a finished run produced, also written to disk by [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: Manifest,
    pub history: Vec<f64>,
    pub report: ErrorReport,
    pub front: Option<HardIcNet>,
    /// First-order correction (method `dae1`).
    pub h1: Option<H1Net>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write(path, &(serde_json::to_string_pretty(value).expect("serializable") + "\n"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

/// `iteration,loss` rows.
pub fn history_csv(history: &[f64]) -> String {
    let mut s = String::from("iteration,loss\n");
    for (i, l) in history.iter().enumerate() {
        writeln!(s, "{i},{l:e}").unwrap();
    }
    s
}

pub fn parse_history_csv(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',').nth(1).and_then(|v| v.parse().ok()).ok_or_else(|| Error::config("loss_history", format!("bad row {l:?}")))
        })
        .collect()
}

fn coord_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

pub fn pointwise_csv(dim: usize, rows: &[PointwiseRow]) -> String {
    let mut s = coord_header(dim).join(",") + ",t,u_pred,u_ref,abs_err\n";
    for r in rows {
        for x in &r.x {
            write!(s, "{x:e},").unwrap();
        }
        writeln!(s, "{:e},{:e},{:e},{:e}", r.t, r.u_pred, r.u_ref, r.abs_err()).unwrap();
    }
    s
}

/// Transverse sample grid used for trajectory dumps.
fn transverse_grid(p: &ProblemSpec, per_axis: usize) -> Vec<Vec<f64>> {
    let (a, _) = p.transverse_bounds();
    let axis: Vec<f64> = (0..per_axis).map(|j| a + p.period * j as f64 / per_axis as f64).collect();
    match p.dim {
        1 => vec![vec![]],
        2 => axis.iter().map(|&y| vec![y]).collect(),
        _ => axis.iter().flat_map(|&y| axis.iter().map(move |&z| vec![y, z])).collect(),
    }
}

/// (x*, t, ĥ₀, oracle h₀, deviation) on a regular grid.
pub fn trajectory_csv(p: &ProblemSpec, net: &dyn FrontEvaluator, oracle: &FrontOracle) -> String {
    let names = ["y", "z"];
    let mut s = String::new();
    for n in &names[..p.dim - 1] {
        s += n;
        s += ",";
    }
    s += "t,h0_pred,h0_oracle,deviation\n";
    let (per_axis, times) = match p.dim {
        1 => (1, 301),
        2 => (32, 21),
        _ => (16, 11),
    };
    for xs in transverse_grid(p, per_axis) {
        for k in 0..times {
            let t = p.t_final * k as f64 / (times - 1) as f64;
            let (a, b) = (net.front(&xs, t).h0, oracle.h0(&xs, t));
            for x in &xs {
                write!(s, "{x:e},").unwrap();
            }
            writeln!(s, "{t:e},{a:e},{b:e},{:e}", (a - b).abs()).unwrap();
        }
    }
    s
}

/// Oracle grid dump: transverse coordinates, t, h₀, ∂ₜh₀.
pub fn oracle_csv(p: &ProblemSpec, oracle: &FrontOracle) -> String {
    let names = ["y", "z"];
    let mut s = String::new();
    for n in &names[..p.dim - 1] {
        s += n;
        s += ",";
    }
    s += "t,h0,ht\n";
    let cells = oracle.grid_coords();
    for t in oracle.snapshot_times() {
        for xs in &cells {
            let f = oracle.front(xs, t);
            for x in xs {
                write!(s, "{x:e},").unwrap();
            }
            writeln!(s, "{t:e},{:e},{:e}", f.h0, f.ht.unwrap_or(f64::NAN)).unwrap();
        }
    }
    s
}

/// Builds the oracle with default resolution and writes its CSV.
pub fn write_oracle(p: &ProblemSpec, path: &Path) -> Result<FrontOracle> {
    let oracle = build_front_oracle(p, Resolution::default_for(p))?;
    write(path, &oracle_csv(p, &oracle))?;
    Ok(oracle)
}

fn dae_candidates(p: &ProblemSpec, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(5);
    let (a, b) = p.transverse_bounds();
    (0..n)
        .map(|_| {
            let x = (1..p.dim).map(|_| a + (b - a) * rng.random::<f64>()).collect();
            Point { x, t: p.t_final * rng.random::<f64>() }
        })
        .collect()
}

enum Trained {
    Front { trainer: Box<DaeTrainer>, h1: Option<(FirstOrder, crate::dae::H1Run)> },
    Pinn(PinnTrainer),
}

/// Runs one configuration and writes all artifacts into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutput> {
    cfg.validate()?;
    let p = cfg.problem_spec()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let start = Instant::now();
    let digest = cfg.digest();
    log::info!("run {} {} mu={} digest {}", cfg.problem, cfg.method.key(), cfg.mu, &digest[..12]);
    let oracle = build_front_oracle(&p, Resolution::default_for(&p))?;

    let mut train = cfg.train.clone();
    train.seed = cfg.seed;
    let mut rar_outcome = None;
    let mut failure = None;
    let trained = match cfg.method {
        Method::Dae | Method::Dae1 => {
            let mut tr = DaeTrainer::new(&p, &train)?;
            let mut result = tr.train(train.iterations);
            if result.is_ok() {
                if let Some(r) = &cfg.rar {
                    let cands = dae_candidates(&p, r.candidates, cfg.seed);
                    match rar_refine(&mut tr, &cands, r) {
                        Ok(o) => rar_outcome = Some(o),
                        Err(e) => result = Err(e),
                    }
                }
            }
            let mut h1 = None;
            if let Err(e) = result {
                failure = Some(e);
            } else if cfg.method == Method::Dae1 {
                let fo = FirstOrder::with_matching_k(&p)?;
                let h1_cfg = cfg.h1.clone().expect("validated");
                let run = train_h1(&fo, &tr.net, &crate::dae::H1Config { seed: cfg.seed, ..h1_cfg })?;
                h1 = Some((fo, run));
            }
            Trained::Front { trainer: Box::new(tr), h1 }
        }
        Method::Pinn => {
            let mut tr = PinnTrainer::new(&p, &train)?;
            let mut result = tr.train(train.iterations);
            if result.is_ok() {
                if let Some(r) = &cfg.rar {
                    let cands = interior_candidates(&p, r.candidates, cfg.seed);
                    match rar_refine(&mut tr, &cands, r) {
                        Ok(o) => rar_outcome = Some(o),
                        Err(e) => result = Err(e),
                    }
                }
            }
            if let Err(e) = result {
                failure = Some(e);
            }
            Trained::Pinn(tr)
        }
    };

    let (history, checkpoint) = match &trained {
        Trained::Front { trainer, .. } => {
            (trainer.history.clone(), Checkpoint::new(&trainer.net.net, Some(p.h_star), &trainer.adam, cfg.seed))
        }
        Trained::Pinn(tr) => (tr.history.clone(), Checkpoint::new(&tr.net, None, &tr.adam, cfg.seed)),
    };
    write(&out.join(LOSS_HISTORY), &history_csv(&history))?;
    checkpoint.save(&out.join(CHECKPOINT))?;
    if let Some(e) = failure {
        let manifest = Manifest {
            config: cfg.clone(),
            digest,
            seed: cfg.seed,
            final_loss: history.last().copied().unwrap_or(f64::NAN),
            e2: f64::NAN,
            e_inf: f64::NAN,
            wall_seconds: start.elapsed().as_secs_f64(),
            n_test: 0,
            skipped: 0,
            rar: rar_outcome.as_ref().map(RarSummary::from),
            failure: Some(e.to_string()),
        };
        write_json(&out.join(MANIFEST), &manifest)?;
        return Err(e);
    }

    let reference = |x: &[f64], t: f64| assemble_u0(&p, &oracle, x, t);
    let (evaluation, final_loss, front, h1) = match &trained {
        Trained::Front { trainer, h1: None } => {
            write(&out.join(TRAJECTORY), &trajectory_csv(&p, &trainer.net, &oracle))?;
            let ev = evaluate_run(&p, |x, t| assemble_u0(&p, &trainer.net, x, t), reference, cfg.n_test, cfg.seed)?;
            (ev, trainer.loss(), Some(trainer.net.clone()), None)
        }
        Trained::Front { trainer, h1: Some((fo, run)) } => {
            write(&out.join(TRAJECTORY), &trajectory_csv(&p, &trainer.net, &oracle))?;
            let mut h1_hist = String::from("iteration,loss\n");
            for (i, l) in run.history.iter().enumerate() {
                writeln!(h1_hist, "{i},{l:e}").unwrap();
            }
            write(&out.join("h1_loss_history.csv"), &h1_hist)?;
            let ev = evaluate_run(&p, |x, t| assemble_u1(fo, &trainer.net, &run.net, x[0], t), reference, cfg.n_test, cfg.seed)?;
            (ev, run.loss(), Some(trainer.net.clone()), Some(run.net.clone()))
        }
        Trained::Pinn(tr) => {
            let net = &tr.net;
            let ev = evaluate_run(&p, |x, t| net.forward(&[x, &[t][..]].concat()), reference, cfg.n_test, cfg.seed)?;
            (ev, crate::pinn::pinn_loss(net, &p, &tr.points, train.loss_weights), None, None)
        }
    };
    let mut report = evaluation.report;
    report.e_loss = final_loss;
    report.config_digest = digest.clone();
    report.wall_seconds = start.elapsed().as_secs_f64();
    write(&out.join(POINTWISE), &pointwise_csv(p.dim, &evaluation.rows))?;
    write_json(&out.join(REPORT), &report)?;
    let manifest = Manifest {
        config: cfg.clone(),
        digest,
        seed: cfg.seed,
        final_loss,
        e2: report.e2,
        e_inf: report.e_inf,
        wall_seconds: report.wall_seconds,
        n_test: report.n_test,
        skipped: report.skipped,
        rar: rar_outcome.as_ref().map(RarSummary::from),
        failure: None,
    };
    write_json(&out.join(MANIFEST), &manifest)?;
    log::info!("e2 {:e} e_inf {:e} loss {:e} in {:.1}s", report.e2, report.e_inf, final_loss, report.wall_seconds);
    Ok(RunOutput { manifest, history, report, front, h1 })
}

type ReportRow = (String, Method, String, Manifest);

/// Manifests of `dirs` sorted by (problem, method, μ descending), plus the
/// directories without a readable manifest.
fn collect_manifests(dirs: &[PathBuf]) -> (Vec<ReportRow>, Vec<String>) {
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut absent = Vec::new();
    for d in dirs {
        match read_json::<Manifest>(&d.join(MANIFEST)) {
            Ok(m) => {
                let name = if m.config.rar.is_some() { format!("{}+rar", m.config.method.key()) } else { m.config.method.key().to_string() };
                rows.push((m.config.problem.clone(), m.config.method, name, m));
            }
            Err(_) => absent.push(d.display().to_string()),
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(b.3.config.mu.total_cmp(&a.3.config.mu)));
    (rows, absent)
}

/// Aligned comparison table over run directories, sorted by
/// (problem, method, μ). Directories without a manifest are listed as absent.
pub fn report_table(dirs: &[PathBuf]) -> String {
    let (rows, absent) = collect_manifests(dirs);
    let mut s = format!("{:<6} {:<9} {:>8} {:>12} {:>12} {:>12} {:>10}\n", "problem", "method", "mu", "e_loss", "e2", "e_inf", "time_s");
    for (problem, _, name, m) in &rows {
        writeln!(
            s,
            "{problem:<6} {name:<9} {:>8.0e} {:>12.3e} {:>12.3e} {:>12.3e} {:>10.1}",
            m.config.mu, m.final_loss, m.e2, m.e_inf, m.wall_seconds
        )
        .unwrap();
    }
    for a in absent {
        writeln!(s, "absent: {a}").unwrap();
    }
    s
}

/// The same rows as [`report_table`] in CSV with full-precision values.
pub fn report_csv(dirs: &[PathBuf]) -> String {
    let (rows, absent) = collect_manifests(dirs);
    let mut s = String::from("problem,method,mu,e_loss,e2,e_inf,time_s,dir\n");
    for (problem, _, name, m) in &rows {
        writeln!(s, "{problem},{name},{:e},{:e},{:e},{:e},{:e},", m.config.mu, m.final_loss, m.e2, m.e_inf, m.wall_seconds).unwrap();
    }
    for a in absent {
        writeln!(s, ",,,,,,,{a}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn history_round_trip() {
        let h = vec![1.5, 0.25, 1e-9, 3.3333333333333335e-7];
        assert_eq!(parse_history_csv(&history_csv(&h)).unwrap(), h);
    }
}
