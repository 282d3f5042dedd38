//! `phonoscope` command-line interface.
//!
//! Exit codes: 0 success, 1 corpus or validation errors, 2 invalid
//! configuration, 3 analysis failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use commands::Run;
use config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("analysis: {0}")]
    Analysis(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Corpus(_) | CliError::Io(_) => 1,
            CliError::Analysis(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "phonoscope", version, about = "Phonological-subspace d-prime profiles and analyses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Run seed; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    min_n: Option<usize>,
    #[arg(long, global = true)]
    n_boot: Option<usize>,
    #[arg(long, global = true)]
    n_perm: Option<usize>,
    #[arg(long, global = true)]
    min_hc: Option<usize>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Comma-separated token budgets for fixed_token.
    #[arg(long, global = true, value_delimiter = ',')]
    budgets: Option<Vec<usize>>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the corpus and print findings; exit 1 on errors.
    Validate,
    /// Write profiles.csv for every backbone.
    Profiles,
    /// Run one analysis by id, or `all`.
    Analyze { id: String },
    /// Generate a synthetic corpus with its ground-truth ledger.
    Synth,
    /// Generate, profile and check a synthetic corpus end to end.
    Selftest,
}

fn threads() -> Result<usize, CliError> {
    match std::env::var("PHONOSCOPE_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("PHONOSCOPE_THREADS={v:?} is not a positive integer"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let (mut cfg, base) = RunConfig::load(&path)?;
    let overrides = Overrides {
        output: cli.output,
        seed: cli.seed,
        min_n: cli.min_n,
        n_boot: cli.n_boot,
        n_perm: cli.n_perm,
        min_hc: cli.min_hc,
        tolerance: cli.tolerance,
        budgets: cli.budgets,
    };
    let (name, analysis) = match &cli.command {
        Command::Validate => ("validate".to_string(), None),
        Command::Profiles => ("profiles".to_string(), None),
        Command::Analyze { id } => {
            let id = if id == "all" {
                "all"
            } else {
                phonoscope::analyses::canonical_id(id)
                    .ok_or_else(|| CliError::Config(format!("unknown analysis id {id:?}")))?
            };
            (format!("analyze {id}"), Some(id))
        }
        Command::Synth => ("synth".to_string(), None),
        Command::Selftest => ("selftest".to_string(), None),
    };
    cfg.apply(&overrides, analysis)?;
    let n_threads = threads()?;
    let run = Run { cfg, base, command: name };
    phonoscope::par::with_threads(n_threads, || match &cli.command {
        Command::Validate => commands::validate(&run),
        Command::Profiles => commands::profiles(&run),
        Command::Analyze { .. } => commands::analyze(&run, analysis.expect("set for analyze")),
        Command::Synth => commands::synth(&run),
        Command::Selftest => commands::selftest(&run),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
