use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lakesim::cli::commands::{self, DEFAULT_NUS, DEFAULT_THETAS};
use lakesim::diagnostics::MonitorSet;
use lakesim::Result;

#[derive(Parser)]
#[command(name = "lakesim", version, about = "Lake equations simulator with estimate monitors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write snapshots and monitors.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated monitor names, or "all".
        #[arg(long)]
        monitors: Option<String>,
    },
    /// Repeat the run for a strictly decreasing list of viscosities.
    StudyNu {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        nu: Option<String>,
    },
    /// Repeat the mollified run for a strictly decreasing list of lags.
    StudyTheta {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        theta: Option<String>,
    },
    /// Run the analytic verification suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recompute the monitors of a run directory from its snapshots.
    Diag {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        monitors: Option<String>,
    },
}

fn monitors(list: Option<&str>) -> Result<Option<MonitorSet>> {
    list.map(MonitorSet::parse).transpose()
}

fn list_or(text: Option<&str>, default: &[f64]) -> Result<Vec<f64>> {
    text.map_or_else(|| Ok(default.to_vec()), commands::parse_list)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, out, monitors: m } => commands::run(&config, out.as_deref(), monitors(m.as_deref())?),
        Command::StudyNu { config, out, nu } => {
            commands::study(&config, out.as_deref(), &list_or(nu.as_deref(), &DEFAULT_NUS)?, false)
        }
        Command::StudyTheta { config, out, theta } => {
            commands::study(&config, out.as_deref(), &list_or(theta.as_deref(), &DEFAULT_THETAS)?, true)
        }
        Command::Verify { seed } => Ok(commands::verify(seed)),
        Command::Diag { config, out, monitors: m } => commands::diag(&config, out.as_deref(), monitors(m.as_deref())?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
