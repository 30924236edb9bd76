use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use layerfront::config::{preset, RunConfig, PRESET_NAMES};
use layerfront::problems::ProblemSpec;
use layerfront::run::{report_csv, report_table, run, write_oracle};

#[derive(Parser)]
#[command(name = "layerfront", version, about = "Deep asymptotic expansion for moving internal layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one configuration.
    Run {
        /// JSON run configuration.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in preset, optionally suffixed with @mu.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mu: Option<f64>,
        /// Use the refinement variant of the preset.
        #[arg(long)]
        rar: bool,
        #[arg(long, default_value = "runs/latest")]
        out: PathBuf,
    },
    /// Solve the front equation classically and write the trajectory grid.
    Oracle {
        /// Problem key (ex1d, ex2d, ex3d).
        problem: String,
        #[arg(long, default_value_t = 1e-2)]
        mu: f64,
        #[arg(long, default_value = "oracle.csv")]
        out: PathBuf,
    },
    /// Tabulate finished runs.
    Report {
        dirs: Vec<PathBuf>,
        /// Also write the table to this file (CSV with full precision if the
        /// name ends in .csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in presets.
    Presets,
}

fn resolve(config: Option<PathBuf>, preset_name: Option<String>, seed: Option<u64>, mu: Option<f64>, rar: bool) -> layerfront::Result<RunConfig> {
    let mut cfg = match (config, preset_name) {
        (Some(path), _) => RunConfig::load(&path)?,
        (None, Some(name)) => {
            let name = if rar && !name.contains("rar") {
                match name.split_once('@') {
                    Some((b, m)) => format!("{b}-rar@{m}"),
                    None => format!("{name}-rar"),
                }
            } else {
                name
            };
            preset(&name)?
        }
        (None, None) => return Err(layerfront::Error::config("config", "pass --config <file> or --preset <name>")),
    };
    if let Some(s) = seed {
        cfg = cfg.with_seed(s);
    }
    if let Some(m) = mu {
        cfg = cfg.with_mu(m);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    layerfront::init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, preset, seed, mu, rar, out } => resolve(config, preset, seed, mu, rar).and_then(|cfg| {
            let out = cfg.out.clone().unwrap_or(out);
            let res = run(&cfg, &out)?;
            println!("{}", serde_json::to_string_pretty(&res.manifest).expect("serializable"));
            Ok(())
        }),
        Command::Oracle { problem, mu, out } => ProblemSpec::by_key(&problem, mu).and_then(|p| {
            write_oracle(&p, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }),
        Command::Report { dirs, out } => {
            let table = report_table(&dirs);
            print!("{table}");
            match out {
                Some(path) => {
                    let text = if path.extension().is_some_and(|e| e == "csv") { report_csv(&dirs) } else { table };
                    std::fs::write(&path, text).map_err(|e| layerfront::Error::Io { path, source: e })
                }
                None => Ok(()),
            }
        }
        Command::Presets => {
            let mut out = std::io::stdout().lock();
            for name in PRESET_NAMES {
                if writeln!(out, "{name}").is_err() {
                    break;
                }
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                layerfront::Error::Config { .. } | layerfront::Error::UnknownKey { .. } | layerfront::Error::Io { .. } | layerfront::Error::Json { .. } => 2,
                _ => 1,
            })
        }
    }
}
