use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use stochreach_cli::error::{CliError, EXIT_CHECK_FAILED};
use stochreach_cli::output::{to_json, write_json};
use stochreach_cli::{load, run, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "stochreach",
    version,
    about = "Interval reach tubes for stochastic systems"
)]
struct Cli {
    /// Write every output into this directory, keeping configured file names.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the reach tube and write the tube CSV and summary JSON.
    Reach { config: PathBuf },
    /// Sample the decomposition conditions; exit 1 on any violation.
    CheckDecomposition {
        config: PathBuf,
        /// Defaults to `validation.samples` from the scenario.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare the tube against sampled trajectories; exit 1 if any step
    /// falls short of its bound.
    McValidate {
        config: PathBuf,
        /// Validate this tube CSV instead of recomputing the tube.
        #[arg(long)]
        tube: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn scenario(cli: &Cli, path: &Path) -> Result<ScenarioConfig, CliError> {
    let mut cfg = load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.redirect_outputs(dir);
    }
    Ok(cfg)
}

fn emit<T: Serialize>(value: &T, report: Option<&Path>) -> Result<(), CliError> {
    println!("{}", to_json(value));
    match report {
        Some(p) => write_json(p, value),
        None => Ok(()),
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Reach { config } => {
            let outcome = run::reach(&scenario(cli, config)?)?;
            println!("{}", to_json(&outcome.summary));
            Ok(true)
        }
        Command::CheckDecomposition {
            config,
            samples,
            report,
        } => {
            let cfg = scenario(cli, config)?;
            let r = run::check_decomposition(
                &cfg,
                samples.unwrap_or(cfg.validation.samples),
                cfg.seed,
            )?;
            emit(&r, report.as_deref())?;
            Ok(r.passed())
        }
        Command::McValidate {
            config,
            tube,
            report,
        } => {
            let r = run::mc_validate(&scenario(cli, config)?, tube.as_deref())?;
            emit(&r, report.as_deref())?;
            Ok(r.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("stochreach: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
