//! `nlse`: dataset generation, splitting, oracle fits, evaluation and self-tests.
//!
//! Exit codes: 0 success, 1 invalid input or failed check, 2 simulation
//! blow-up, 3 I/O failure. Machine-readable results go to stdout, diagnostics
//! to stderr.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlse_core::oracle::FitMethod;

pub const EXIT_INVALID: u8 = 1;
pub const EXIT_BLOW_UP: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "nlse", version, about = "Saturable Kerr propagation datasets and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate every triplet of a manifest into a dataset directory.
    Generate {
        /// Manifest JSON used as the generation config.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the manifest's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 uses every core).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Record a seeded train/validation/test partition in the manifest.
    Split {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        fractions: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit one stored observation by simulation in the loop.
    Oracle {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        index: usize,
        #[arg(long, default_value = "nelder-mead")]
        method: FitMethod,
        #[arg(long, default_value_t = 500)]
        budget: usize,
    },
    /// Score a predictions CSV against a dataset.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Metrics JSON output path.
        #[arg(long)]
        out: PathBuf,
        /// Directory for predicted-versus-true SVG plots.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run the analytic self-checks.
    Selftest {
        #[arg(long, hide = true)]
        reverse_kinetic_phase: bool,
        #[arg(long, hide = true)]
        forced_steps: Option<usize>,
        /// Run only the named checks.
        #[arg(long, hide = true, value_delimiter = ',')]
        only: Vec<String>,
    },
}

/// A failed command: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<nlse_core::Error> for Failure {
    fn from(e: nlse_core::Error) -> Self {
        let code = match &e {
            _ if e.is_blow_up() => EXIT_BLOW_UP,
            nlse_core::Error::Io(_) => EXIT_IO,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate {
            config,
            out,
            seed,
            threads,
        } => commands::generate(&config, &out, seed, threads),
        Command::Split {
            dataset,
            fractions,
            seed,
        } => commands::split(&dataset, &fractions, seed),
        Command::Oracle {
            dataset,
            index,
            method,
            budget,
        } => commands::oracle(&dataset, index, method, budget),
        Command::Eval {
            pred,
            dataset,
            out,
            plot,
        } => commands::eval(&pred, &dataset, &out, plot.as_deref()),
        Command::Selftest {
            reverse_kinetic_phase,
            forced_steps,
            only,
        } => commands::selftest(reverse_kinetic_phase, forced_steps, &only),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
