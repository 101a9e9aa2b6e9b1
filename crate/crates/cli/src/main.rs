use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use membrane_cli::config::load_config;
use membrane_cli::run::{run_alphabar, run_solve, run_sweep, run_verify};
use membrane_cli::CliError;

/// Composite-membrane eigenvalue optimization: minimize the first Dirichlet
/// eigenvalue of -laplacian + alpha*indicator over sets of fixed measure and
/// certify the structural properties of the optimum.
#[derive(Parser)]
#[command(name = "membrane", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the optimizer and write mask/field/boundary artifacts plus a report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides run.seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides output.dir from the config file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the analysis checks against stored solve artifacts.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase-table sweep over sweep.alpha x sweep.fraction.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve Lambda(alpha, A) = alpha by bisection.
    Alphabar {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// MEMBRANE_THREADS caps worker parallelism; the default of 1 keeps runs
/// bitwise deterministic.
fn thread_budget() -> usize {
    std::env::var("MEMBRANE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

fn dispatch() -> Result<(), CliError> {
    let cli = Cli::parse();
    let threads = thread_budget();
    match cli.command {
        Command::Solve { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let outcome = run_solve(&cfg, threads)?;
            println!(
                "lambda = {} (report: {})",
                outcome.lambda,
                outcome.report_path.display()
            );
            Ok(())
        }
        Command::Verify { config, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            run_verify(&cfg)
        }
        Command::Sweep { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let path = run_sweep(&cfg, threads)?;
            println!("sweep table: {}", path.display());
            Ok(())
        }
        Command::Alphabar { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let path = run_alphabar(&cfg, threads)?;
            println!("alpha-bar report: {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("membrane: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
