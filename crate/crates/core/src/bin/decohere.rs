//! Thin command-line front end over the config runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conjugate_decoherence::config::ExperimentConfig;
use conjugate_decoherence::runner::{run_with, RunOptions, REPORT_FILE};

#[derive(Parser)]
#[command(version, about = "Reduced-density-matrix sweeps for a doubly measured particle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for independent time points.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Write artifacts here instead of the config's `output_dir`.
    #[arg(long, global = true, value_name = "PATH")]
    output_dir: Option<PathBuf>,
    /// Treat small negative eigenvalues as errors.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full sweep described by a config.
    Run { config: PathBuf },
    /// Check a config and print its normalized form.
    Validate { config: PathBuf },
    /// Compare the factorized kernels with the brute-force oracle only.
    Oracle { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (path, oracle_only) = match &cli.command {
        Command::Validate { config } => {
            return match ExperimentConfig::from_path(config) {
                Ok(cfg) => {
                    print!("{}", cfg.to_toml());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            };
        }
        Command::Run { config } => (config, false),
        Command::Oracle { config } => (config, true),
    };
    let config = match ExperimentConfig::from_path(path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let options = RunOptions {
        workers: cli.workers,
        output_dir: cli.output_dir,
        strict: cli.strict,
        oracle_only,
    };
    match run_with(&config, &options) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} files written; summary in {}",
                report.files.len(),
                report.output_dir.join(REPORT_FILE).display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: conjugate_decoherence::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
