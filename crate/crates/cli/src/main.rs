//! `unirp`: run revealed-preference tests on dataset files, rebuild utilities and
//! costs, and generate seeded corpora.
//!
//! Exit codes: 0 when the test passes (data rationalizable), 1 when it fails,
//! 2 on usage, parse or validation errors.

mod check;
mod generate;
mod reconstruct;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "unirp", version, about = "Classical and Bayesian revealed-preference tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one test on a dataset file (or every file in a directory).
    Check(CheckArgs),
    /// Write a seeded synthetic dataset.
    Generate(GenerateArgs),
    /// Rebuild a utility, budget cost or information cost from a feasible dataset.
    Reconstruct(ReconstructArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Garp,
    Afriat,
    Crp,
    Nias,
    NiacCycles,
    Brp,
    Blackwell,
    Unify,
    AuditAxioms,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub test: TestKind,
    #[arg(long, required_unless_present = "batch", conflicts_with = "batch")]
    pub input: Option<PathBuf>,
    /// Check every `*.json` file in this directory, in parallel.
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// Tolerance for relation decisions and certificate re-verification.
    #[arg(long, default_value_t = unirp::VERIFY_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample count for audits.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Rescale priors and kernel rows to sum to one before validating.
    #[arg(long)]
    pub renormalize: bool,
    /// Print the machine-readable report instead of a summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Classical,
    BayesRational,
    NiacViolation,
    BlackwellPair,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub family: FamilyKind,
    /// Number of experiments.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Number of goods (classical).
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Number of states.
    #[arg(long, default_value_t = 3)]
    pub x: usize,
    /// Number of observations.
    #[arg(long, default_value_t = 3)]
    pub y: usize,
    /// Number of actions.
    #[arg(long, default_value_t = 3)]
    pub a: usize,
    /// Kernels in the garbling grid.
    #[arg(long, default_value_t = 40)]
    pub grid: usize,
    /// Scale of the mutual-information cost.
    #[arg(long, default_value_t = 0.25)]
    pub cost_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; the dataset goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Artifact {
    /// Information cost from a Bayes dataset.
    Cost,
    /// Utility from a classical dataset.
    Utility,
    /// Budget cost from a CRP dataset.
    Budget,
}

#[derive(Args)]
pub struct ReconstructArgs {
    #[arg(value_enum)]
    pub artifact: Artifact,
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the reconstruction; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluation points: `{"kernels": [...]}`, `{"g_evals": [...]}` or `{"u_evals": [...]}`.
    #[arg(long)]
    pub eval: Option<PathBuf>,
    #[arg(long)]
    pub renormalize: bool,
}

/// Outcome of a command, mapped onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass = 0,
    Fail = 1,
    Error = 2,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(args) => check::run(&args),
        Command::Generate(args) => generate::run(&args),
        Command::Reconstruct(args) => reconstruct::run(&args),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Error as u8)
        }
    }
}
