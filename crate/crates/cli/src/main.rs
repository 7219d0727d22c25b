use std::process::ExitCode;

use clap::{Parser, Subcommand};

use emoddm_cli::commands;
use emoddm_cli::config::{CommonArgs, Settings};

#[derive(Debug, Parser)]
#[command(name = "emoddm", version, about = "Drift-diffusion replications of two emotion-labeling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the studies with fixed parameters and write tables (and charts).
    Replicate(CommonArgs),
    /// Grid-search model parameters and write FitResult JSON.
    Fit(CommonArgs),
    /// Compare the simulator against closed-form random-walk results.
    OracleCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Shift the simulated drift by this many step sizes (negative control).
        #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
        kernel_bias: f64,
    },
    /// Write the embedded observed data.
    ExportData(CommonArgs),
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Replicate(args) => commands::replicate(&Settings::resolve(&args)?)?,
        Command::Fit(args) => {
            commands::fit(&Settings::resolve(&args)?)?;
        }
        Command::OracleCheck { common, kernel_bias } => {
            let report = commands::oracle_check(&Settings::resolve(&common)?, kernel_bias)?;
            if !report.passed() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::ExportData(args) => commands::export_data(&Settings::resolve(&args)?)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
