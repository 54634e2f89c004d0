//! Thin command-line front end over the library's experiment runner.
//!
//! `dp-saddle run <config.toml>` executes a grid and exits 0 only if no
//! cell errored; `dp-saddle fit <csv> --x n --y mean` fits a log-log rate
//! to columns of a results file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dp_saddle::experiment::{fit_rate, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "dp-saddle", about = "Saddle-point experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid described by a TOML config.
    Run {
        /// Path to the config file.
        config: PathBuf,
    },
    /// Fit a log-log rate to two columns of a results CSV.
    Fit {
        /// Path to the CSV file.
        csv: PathBuf,
        /// Column holding the regressor (for example "n").
        #[arg(long = "x")]
        x: String,
        /// Column holding the response (for example "mean").
        #[arg(long = "y")]
        y: String,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => {
            let parsed = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            match run_experiment(&parsed) {
                Ok(summary) => {
                    println!(
                        "wrote {} rows to {} ({} errored)",
                        summary.rows,
                        summary.csv_path.display(),
                        summary.errored_cells
                    );
                    println!("manifest: {}", summary.manifest_path.display());
                    if summary.errored_cells == 0 {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Fit { csv, x, y } => match fit_rate(&csv, &x, &y) {
            Ok(fit) => {
                println!(
                    "slope = {:.6}, intercept = {:.6}, r_squared = {:.6}, points = {}",
                    fit.slope, fit.intercept, fit.r_squared, fit.points
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
