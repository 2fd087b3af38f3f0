//! Command line: `polyuq <experiment> --config <file> [--seed N] [--out DIR]`.
//! Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
//! failures.

use std::path::PathBuf;
use std::process::ExitCode;

use polyuq::config::{Experiment, ExperimentConfig};
use polyuq::experiments;

const USAGE: &str = "\
usage: polyuq <experiment> --config <file> [--seed N] [--out DIR] [--threads N]

experiments:
  qoi-convergence    deterministic H1/L2/QoI convergence study
  mc-convergence     single-level Monte Carlo convergence
  mlmc-convergence   multilevel Monte Carlo convergence and sample tables
  samples-table      allocation formulas and complexity fit (no solves)
  cost-accuracy      cost versus accuracy for both estimators
  validate-regions   piecewise-region validation on the strip domain
";

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            ExitCode::from(2)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Usage(String),
    Config(String),
    Numerical(String),
}

fn run() -> Result<(), CliError> {
    let mut args = std::env::args().skip(1);
    let experiment_name = args
        .next()
        .ok_or_else(|| CliError::Usage("missing experiment".into()))?;
    if experiment_name == "--help" || experiment_name == "-h" || experiment_name == "help" {
        println!("{USAGE}");
        return Ok(());
    }
    let experiment = Experiment::parse(&experiment_name)
        .ok_or_else(|| CliError::Usage(format!("unknown experiment `{experiment_name}`")))?;

    let mut config_path: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut seed_override: Option<u64> = None;
    let mut threads_override: Option<usize> = None;
    while let Some(arg) = args.next() {
        let mut value = |name: &str| {
            args.next()
                .ok_or_else(|| CliError::Usage(format!("{name} needs a value")))
        };
        match arg.as_str() {
            "--config" => config_path = Some(PathBuf::from(value("--config")?)),
            "--out" => out_dir = Some(PathBuf::from(value("--out")?)),
            "--seed" => {
                seed_override = Some(
                    value("--seed")?
                        .parse()
                        .map_err(|_| CliError::Usage("bad --seed".into()))?,
                )
            }
            "--threads" => {
                threads_override = Some(
                    value("--threads")?
                        .parse()
                        .map_err(|_| CliError::Usage("bad --threads".into()))?,
                )
            }
            other => return Err(CliError::Usage(format!("unknown argument `{other}`"))),
        }
    }
    let config_path =
        config_path.ok_or_else(|| CliError::Usage("missing --config <file>".into()))?;

    let mut config = ExperimentConfig::from_file(&config_path)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if config.experiment != experiment {
        return Err(CliError::Config(format!(
            "config declares experiment `{}` but `{}` was requested",
            config.experiment.name(),
            experiment.name()
        )));
    }
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    if let Some(threads) = threads_override {
        config.threads = threads;
    }

    let out = out_dir.unwrap_or_else(|| PathBuf::from(format!("out-{}", experiment.name())));
    match experiments::run(&config, &out) {
        Ok(_) => {
            println!("wrote {}", out.display());
            Ok(())
        }
        Err(e) if experiments::is_config_failure(&e) => Err(CliError::Config(e.to_string())),
        Err(e) => Err(CliError::Numerical(e.to_string())),
    }
}
