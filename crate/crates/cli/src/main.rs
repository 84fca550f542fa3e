//! `ellipsephic`: run counting experiments from a `key=value` config and
//! write CSV/JSON results.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ellipsephic::Error;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// List the members of E(X).
    Enumerate,
    /// Representation-count growth of a digit source.
    Etstar,
    /// Mean-value solution counts over a range of X.
    Count,
    /// λ-ratio or K sweeps over B.
    Congruence,
    /// Carry decomposition or lifting chain.
    Lift,
    /// Representation counts for sums of k-th powers.
    Waring,
    /// Exponent fit of a count series.
    Fit,
}

#[derive(Debug, Parser)]
#[command(name = "ellipsephic", version, about = "Counting experiments over ellipsephic sets")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Extra `key=value` settings, merged over the config file.
    settings: Vec<String>,
    /// Config file of `key=value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Maximum number of tuple evaluations.
    #[arg(long)]
    budget_tuples: Option<u128>,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
            .parse()?,
        None => ExperimentConfig::default(),
    };
    let extra: ExperimentConfig = cli.settings.join("\n").parse()?;
    for key in extra.keys() {
        cfg.set(key, extra.raw(key).unwrap_or_default());
    }
    if let Some(n) = cli.budget_tuples {
        cfg.set("budget_tuples", n);
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<Vec<String>, Error> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::InvalidParameter("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invariant(e.to_string()))?;
    }
    let cfg = load_config(cli)?;
    let name = cli
        .command
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let (sink, notes) = commands::run(&name, &cfg, &cli.out)?;
    let mut lines: Vec<String> = sink
        .written()
        .iter()
        .map(|p| format!("wrote {}", p.display()))
        .collect();
    lines.extend(notes);
    Ok(lines)
}

fn classify(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Budget { .. } => ("budget", 3),
        Error::Invariant(_) => ("invariant", 4),
        Error::Io(_) => ("io", 1),
        _ => ("validation", 2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (kind, code) = classify(&e);
            let msg = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error kind={kind} msg={msg}");
            ExitCode::from(code)
        }
    }
}
