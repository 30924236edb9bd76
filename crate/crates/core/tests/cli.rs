use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use layerfront::config::{preset, Method, RunConfig};
use layerfront::metrics::ErrorReport;
use layerfront::network::Checkpoint;
use layerfront::run::{parse_history_csv, read_json, Manifest, CHECKPOINT, LOSS_HISTORY, MANIFEST, POINTWISE, REPORT, TRAJECTORY};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_layerfront"));
    c.env("RUST_LOG", "warn");
    c
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn tiny(method: Method) -> RunConfig {
    let mut cfg = preset(if method == Method::Pinn { "ex1d-pinn" } else { "ex1d-dae" }).unwrap();
    cfg.train.iterations = 20;
    cfg.train.n_residual = 40;
    cfg.train.n_boundary = 10;
    cfg.train.n_initial = 10;
    cfg.n_test = 200;
    cfg
}

fn run_config(cfg: &RunConfig, dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    cfg.save(&path).unwrap();
    let out = dir.join(name);
    let o = exec(&["run", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn run_writes_parseable_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(Method::Dae);
    let a = run_config(&cfg, dir.path(), "a");
    let b = run_config(&cfg, dir.path(), "b");
    let ha = std::fs::read(a.join(LOSS_HISTORY)).unwrap();
    assert_eq!(ha, std::fs::read(b.join(LOSS_HISTORY)).unwrap());

    let m: Manifest = read_json(&a.join(MANIFEST)).unwrap();
    assert_eq!(m.config, cfg);
    assert_eq!(m.digest, cfg.digest());
    assert_eq!(m.seed, 1234);
    assert!(m.failure.is_none());
    let history = parse_history_csv(&String::from_utf8(ha).unwrap()).unwrap();
    assert_eq!(history.len(), 20);
    let r: ErrorReport = read_json(&a.join(REPORT)).unwrap();
    assert_eq!((r.e2, r.e_inf, r.n_test), (m.e2, m.e_inf, m.n_test));
    assert_eq!(r.config_digest, m.digest);
    let cp = Checkpoint::load(&a.join(CHECKPOINT)).unwrap();
    assert_eq!(cp.params().unwrap().sizes(), &[1, 10, 10, 10, 10, 1]);

    let (header, rows) = csv_rows(&a.join(POINTWISE));
    assert_eq!(header, ["x1", "t", "u_pred", "u_ref", "abs_err"]);
    assert_eq!(rows.len(), 200);
    let worst = rows.iter().map(|r| r[4]).fold(0.0, f64::max);
    assert_eq!(worst, m.e_inf);
    let (header, rows) = csv_rows(&a.join(TRAJECTORY));
    assert_eq!(header, ["t", "h0_pred", "h0_oracle", "deviation"]);
    assert_eq!(rows[0][1], 0.1);
    assert_eq!(rows[0][2], 0.1);
}

#[test]
fn pinn_run_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let pinn = run_config(&tiny(Method::Pinn), dir.path(), "pinn");
    let dae = run_config(&tiny(Method::Dae), dir.path(), "dae");
    let dae_small = run_config(&tiny(Method::Dae).with_mu(1e-3), dir.path(), "dae_small");
    let missing = dir.path().join("nothing-here");
    let csv = dir.path().join("table.csv");
    let args: Vec<String> = ["report", pinn.to_str().unwrap(), dae_small.to_str().unwrap(), missing.to_str().unwrap(), dae.to_str().unwrap(), "--out", csv.to_str().unwrap()]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let o = bin().args(&args).output().unwrap();
    assert!(o.status.success());
    let table = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1].contains("dae") && lines[1].contains("1e-2"));
    assert!(lines[2].contains("dae") && lines[2].contains("1e-3"));
    assert!(lines[3].contains("pinn"));
    assert!(lines[4].starts_with("absent:") && lines[4].contains("nothing-here"));

    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for (row, dir) in rows.iter().zip([&dae, &dae_small, &pinn]) {
        let m: Manifest = read_json(&dir.join(MANIFEST)).unwrap();
        assert_eq!(row[1], m.config.method.key());
        assert_eq!(row[2].parse::<f64>().unwrap(), m.config.mu);
        assert_eq!(row[3].parse::<f64>().unwrap(), m.final_loss);
        assert_eq!(row[4].parse::<f64>().unwrap(), m.e2);
        assert_eq!(row[5].parse::<f64>().unwrap(), m.e_inf);
        assert_eq!(row[6].parse::<f64>().unwrap(), m.wall_seconds);
    }
    assert!(rows[3][7].contains("nothing-here"));
}

#[test]
fn usage_errors_exit_non_zero() {
    let o = exec(&["run", "--config", "/definitely/not/here.json"]);
    assert!(!o.status.success());
    let o = exec(&["run", "--preset", "ex9d-dae"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ex1d-dae"));
    let o = exec(&["oracle", "ex5d"]);
    assert!(!o.status.success());
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(Method::Dae);
    cfg.n_test = 0;
    let path = dir.path().join("bad.json");
    cfg.save(&path).unwrap();
    let o = exec(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_test"));
}

#[test]
fn presets_are_listed() {
    let o = exec(&["presets"]);
    assert!(o.status.success());
    let names: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(names, layerfront::config::PRESET_NAMES);
}

#[test]
fn oracle_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("o1.csv");
    assert!(exec(&["oracle", "ex1d", "--out", one.to_str().unwrap()]).status.success());
    let (header, rows) = csv_rows(&one);
    assert_eq!(header, ["t", "h0", "ht"]);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][1], 0.1);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));

    let two = dir.path().join("o2.csv");
    assert!(exec(&["oracle", "ex2d", "--out", two.to_str().unwrap()]).status.success());
    let (header, rows) = csv_rows(&two);
    assert_eq!(header, ["y", "t", "h0", "ht"]);
    let mut pairs = 0;
    for r in &rows {
        if r[0] == -2.0 {
            let other = rows.iter().find(|q| q[0] == 2.0 && q[1] == r[1]).unwrap();
            assert!((r[2] - other[2]).abs() < 1e-9);
            pairs += 1;
        }
    }
    assert_eq!(pairs, 201);
}

#[test]
fn digest_follows_every_field() {
    let base = tiny(Method::Dae);
    let variants = [
        base.clone().with_seed(7),
        base.clone().with_mu(1e-3),
        RunConfig { n_test: 201, ..base.clone() },
        RunConfig { problem: "ex2d".into(), ..base.clone() },
        {
            let mut c = base.clone();
            c.train.lr = 2e-3;
            c
        },
        {
            let mut c = base.clone();
            c.train.hidden[0] = 11;
            c
        },
    ];
    for v in &variants {
        assert_ne!(v.digest(), base.digest());
    }
    let round: RunConfig = serde_json::from_str(&serde_json::to_string(&base).unwrap()).unwrap();
    assert_eq!(round.digest(), base.digest());
}
