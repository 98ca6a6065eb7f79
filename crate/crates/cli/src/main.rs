//! Batch experiment runner: parses a JSON experiment config, invokes the
//! toolkit, and writes `report.json` plus `table.csv` into the output
//! directory.
//!
//! Exit codes: 0 on pass, 2 when any check fails, 1 on configuration or IO
//! errors. Outputs are byte-identical across runs for a fixed config.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "hdist",
    about = "Fourier multiplier and H-distribution experiments on the periodic grid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the dyadic partition of unity.
    PartitionCheck(RunArgs),
    /// Classical or fractional multiplier condition tables for a symbol.
    SymbolCheck(RunArgs),
    /// Empirical L^p -> L^p lower bounds over an exponent sweep.
    NormSweep(RunArgs),
    /// Evaluate the H-distribution functional along an n-schedule.
    Hdist(RunArgs),
    /// Localization-principle experiment.
    Localization(RunArgs),
    /// Div-curl experiment.
    Divcurl(RunArgs),
    /// Calderon-Zygmund decomposition property run.
    Cz(RunArgs),
    /// Commutator decay along an n-schedule.
    Commutator(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and table.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, args, runner): (
        &str,
        &RunArgs,
        fn(&config::RawConfig) -> Result<commands::CommandOutput, String>,
    ) = match &cli.command {
        Command::PartitionCheck(a) => ("partition-check", a, commands::run_partition_check),
        Command::SymbolCheck(a) => ("symbol-check", a, commands::run_symbol_check),
        Command::NormSweep(a) => ("norm-sweep", a, commands::run_norm_sweep),
        Command::Hdist(a) => ("hdist", a, commands::run_hdist),
        Command::Localization(a) => ("localization", a, commands::run_localization),
        Command::Divcurl(a) => ("divcurl", a, commands::run_divcurl),
        Command::Cz(a) => ("cz", a, commands::run_cz),
        Command::Commutator(a) => ("commutator", a, commands::run_commutator),
    };

    let bytes = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {}", args.config.display(), e);
            return ExitCode::from(1);
        }
    };
    let raw = match config::parse_config(&bytes) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(1);
        }
    };
    if raw.command != name {
        eprintln!(
            "error: config `command` is {:?} but the {} subcommand was invoked",
            raw.command, name
        );
        return ExitCode::from(1);
    }
    match runner(&raw) {
        Ok((report, csv)) => {
            if let Err(e) = report.write(&args.out, &csv) {
                eprintln!("error: {}", e);
                return ExitCode::from(1);
            }
            report.print_summary();
            if report.passed {
                ExitCode::from(0)
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}
