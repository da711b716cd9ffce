//! `affine-mixer`: batch experiment driver.
//!
//! Each subcommand reads a JSON experiment config and writes CSV/JSON
//! reports into the output directory. On failure a single JSON record
//! `{"error": <kind>, "message": <text>}` goes to stderr and the exit
//! status is 1.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Overrides, Task};
use run::RunError;

#[derive(Parser)]
#[command(name = "affine-mixer", version, about = "Mixing experiments for X_{n+1} = A X_n + B_n (mod p)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral regime of the matrix, with admissibility per modulus when increments are given.
    Classify(Common),
    /// Exact distribution after n steps, tv trajectory, optional simulation.
    Evolve(Common),
    /// Exact tv against the Fourier upper and lower bounds for n = 0..=n.
    Bounds(Common),
    /// Mixing time for each modulus plus rate fits.
    MixingSweep(Common),
    /// Base-sigma digit blocks of a/p and their alternation counts.
    DigitCensus(Common),
    /// Checks the telescoping and expansion identities for the matrix.
    VerifyIdentities(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    n_cap: Option<u64>,
}

impl Command {
    fn split(self) -> (Task, Common) {
        match self {
            Command::Classify(c) => (Task::Classify, c),
            Command::Evolve(c) => (Task::Evolve, c),
            Command::Bounds(c) => (Task::Bounds, c),
            Command::MixingSweep(c) => (Task::MixingSweep, c),
            Command::DigitCensus(c) => (Task::DigitCensus, c),
            Command::VerifyIdentities(c) => (Task::VerifyIdentities, c),
        }
    }
}

fn execute(task: Task, args: Common) -> Result<Vec<PathBuf>, RunError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    cfg.apply(&Overrides {
        seed: args.seed,
        eps: args.eps,
        n_cap: args.n_cap,
        out: args.out,
    });
    run::run(task, &cfg)
}

fn main() -> ExitCode {
    let (task, args) = Cli::parse().command.split();
    match execute(task, args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::FAILURE
        }
    }
}
