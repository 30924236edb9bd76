//! Run configuration and built-in presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dae::{H1Config, RarConfig, TrainConfig};
use crate::error::{Error, Result};
use crate::problems::{ProblemSpec, PROBLEM_KEYS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dae,
    Dae1,
    Pinn,
}

pub const METHOD_KEYS: [&str; 3] = ["dae", "dae1", "pinn"];

impl Method {
    pub fn key(self) -> &'static str {
        match self {
            Method::Dae => "dae",
            Method::Dae1 => "dae1",
            Method::Pinn => "pinn",
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "dae" => Ok(Method::Dae),
            "dae1" => Ok(Method::Dae1),
            "pinn" => Ok(Method::Pinn),
            _ => Err(Error::UnknownKey { kind: "method", key: key.into(), valid: METHOD_KEYS.join(", ") }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub method: Method,
    pub mu: f64,
    pub train: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rar: Option<RarConfig>,
    /// First-order network settings (method `dae1`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1: Option<H1Config>,
    pub n_test: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::by_key(&self.problem, self.mu)
    }

    /// Sets the run seed and every derived seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.train.seed = seed;
        if let Some(h1) = &mut self.h1 {
            h1.seed = seed;
        }
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !PROBLEM_KEYS.contains(&self.problem.as_str()) {
            return Err(Error::UnknownKey { kind: "problem", key: self.problem.clone(), valid: PROBLEM_KEYS.join(", ") });
        }
        if !(self.mu > 0.0) {
            return Err(Error::config("mu", "must be positive"));
        }
        if self.n_test == 0 {
            return Err(Error::config("n_test", "must be at least 1"));
        }
        self.train.validate()?;
        if let Some(r) = &self.rar {
            r.validate()?;
        }
        match self.method {
            Method::Pinn if self.train.n_boundary == 0 || self.train.n_initial == 0 => {
                Err(Error::config("train.n_boundary", "PINN runs need boundary and initial points"))
            }
            Method::Dae1 if self.problem != "ex1d" => Err(Error::config("method", "dae1 is only available for ex1d")),
            Method::Dae1 if self.h1.is_none() => Err(Error::config("h1", "dae1 runs need an h1 section")),
            _ => Ok(()),
        }
    }

    /// SHA-256 of `"blob <len>\0<json>"` over the compact JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", json.len()).as_bytes());
        h.update(json.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Table of built-in runs, one per problem/method with refinement variants.
pub const PRESET_NAMES: [&str; 13] = [
    "ex1d-dae",
    "ex1d-dae-rar",
    "ex1d-dae1",
    "ex1d-pinn",
    "ex1d-pinn-rar",
    "ex2d-dae",
    "ex2d-dae-rar",
    "ex2d-pinn",
    "ex2d-pinn-rar",
    "ex3d-dae",
    "ex3d-dae-rar",
    "ex3d-pinn",
    "ex3d-pinn-rar",
];

/// Learning rate of the built-in presets.
pub const PRESET_LR: f64 = 1e-3;

fn rar(candidates: usize, per_round: usize, added: usize, iterations: usize) -> RarConfig {
    RarConfig { candidates, per_round, tolerance: 1e-6, iterations_per_round: iterations, max_rounds: added / per_round }
}

/// Looks up a preset. `name@mu` overrides μ (default 1e-2); `+rar` is
/// accepted for `-rar`.
pub fn preset(name: &str) -> Result<RunConfig> {
    let (base, mu) = match name.split_once('@') {
        Some((b, m)) => (b, m.parse::<f64>().map_err(|_| Error::config("mu", format!("cannot parse {m:?}")))?),
        None => (name, 1e-2),
    };
    let base = base.to_ascii_lowercase().replace("+rar", "-rar");
    let unknown = || Error::UnknownKey { kind: "preset", key: name.into(), valid: PRESET_NAMES.join(", ") };
    let mut parts = base.splitn(3, '-');
    let problem = parts.next().ok_or_else(unknown)?.to_string();
    let method = Method::from_key(parts.next().ok_or_else(unknown)?).map_err(|_| unknown())?;
    let with_rar = match parts.next() {
        None => false,
        Some("rar") => true,
        Some(_) => return Err(unknown()),
    };
    let (depth, dae_pts, dae_k, pinn_pts, pinn_k, n_test) = match problem.as_str() {
        "ex1d" => (4, (1000, 0), 8000, (2000, 2000, 2000), 20000, 5000),
        "ex2d" => (5, (2000, 1000), 15000, (3000, 1000, 3000), 30000, 10000),
        "ex3d" => (6, (4000, 2000), 20000, (6000, 6000, 6000), 40000, 13000),
        _ => return Err(unknown()),
    };
    if method == Method::Dae1 && (problem != "ex1d" || with_rar) {
        return Err(unknown());
    }
    let seed = 1234;
    let mut train = match method {
        Method::Dae | Method::Dae1 => TrainConfig::new(depth, 10, dae_k, dae_pts.0, dae_pts.1),
        Method::Pinn => {
            let mut t = TrainConfig::new(depth, 10, pinn_k, pinn_pts.0, 0);
            t.n_boundary = pinn_pts.1;
            t.n_initial = pinn_pts.2;
            t
        }
    };
    train.lr = PRESET_LR;
    train.seed = seed;
    let rar_cfg = if with_rar {
        let k = train.iterations;
        let (initial, cfg) = match (problem.as_str(), method) {
            ("ex1d", Method::Dae) => (800, rar(5000, 5, 200, k)),
            ("ex1d", _) => (1800, rar(10000, 5, 200, k)),
            ("ex2d", Method::Dae) => (1800, rar(30000, 10, 400, k)),
            ("ex2d", _) => (2800, rar(35000, 10, 400, k)),
            ("ex3d", Method::Dae) => (3600, rar(50000, 20, 400, k)),
            _ => (5600, rar(50000, 20, 400, k)),
        };
        train.n_residual = initial;
        Some(cfg)
    } else {
        None
    };
    let h1 = (method == Method::Dae1).then(|| H1Config { hidden: vec![10; 4], iterations: 8000, n_times: 1000, lr: PRESET_LR, seed });
    Ok(RunConfig { problem, method, mu, train, rar: rar_cfg, h1, n_test, seed, out: None })
}
