//! `rglab`: command-line front end for the rglab library.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad input or unwritable output; exit 2.
    Validation(String),
    /// A numerical gate did not hold; exit 3.
    Gate(String),
}

impl From<rglab::Error> for CliError {
    fn from(e: rglab::Error) -> Self {
        use rglab::Error::*;
        match e {
            NotPsd(_) | NoBracket | NonConvergent(_) | Gate(_) => CliError::Gate(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "rglab", version, about = "Renormalisation-group numerics for the hierarchical |φ|⁴ model")]
struct Cli {
    /// JSON run configuration; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (RGLAB_THREADS takes precedence)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Covariance moments, γ_j and ϑ_j per scale
    Hier(Flags),
    /// Finite-range kernels per scale and the symbol-sum residual
    Frd(Flags),
    /// Perturbative flow trajectory
    Flow(Flags),
    /// Critical bare mass by backward summation and by bisection
    Critical(Flags),
    /// Susceptibility near criticality
    Chi(Flags),
    /// Nonperturbative block-spin recursion
    Nonpert(Flags),
    /// Recursion versus direct quadrature on a small chain
    Oracle(Flags),
    /// Mean-field (β, h) sweep
    Meanfield(Flags),
    /// Bubble values, SAW counts and walk representations
    Walks(Flags),
    /// Supersymmetric identity suite
    #[command(name = "susy-check")]
    SusyCheck(Flags),
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Hier(f) => ("hier", f),
            Command::Frd(f) => ("frd", f),
            Command::Flow(f) => ("flow", f),
            Command::Critical(f) => ("critical", f),
            Command::Chi(f) => ("chi", f),
            Command::Nonpert(f) => ("nonpert", f),
            Command::Oracle(f) => ("oracle", f),
            Command::Meanfield(f) => ("meanfield", f),
            Command::Walks(f) => ("walks", f),
            Command::SusyCheck(f) => ("susy-check", f),
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var("RGLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Validation(format!("RGLAB_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(k) = thread_count(cli.threads)? {
        if k == 0 {
            return Err(CliError::Validation("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }
    let (name, flags) = cli.command.parts();
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_flags(flags);
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    let cfg = cfg.with_defaults(&commands::defaults(name));
    commands::dispatch(name, &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Gate(m)) => {
            eprintln!("gate failed: {m}");
            ExitCode::from(3)
        }
    }
}
