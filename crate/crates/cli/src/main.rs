mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Command, ConfigError, FlagOverrides, RunConfig};

/// Klein–Gordon low-regularity integrator: single runs, convergence studies and self-test.
#[derive(Debug, Parser)]
#[command(name = "lowreg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file with [problem], [data], [study] and [output] sections.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set study.k_max=7`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the study grid.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Base seed for random initial data.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Only print errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Evolve one initial state and write the final state and a JSON summary.
    Run(Common),
    /// Temporal convergence study over the stepsize ladder.
    Converge(Common),
    /// Spatial convergence study at a fixed small stepsize.
    Spatial(Common),
    /// Error against wall time, with a ranking by time to reach the target error.
    Efficiency(Common),
    /// Fast invariant battery; exits with 3 if any check fails.
    Selftest {
        #[arg(long)]
        quiet: bool,
        /// Branch threshold for Ψ₂ in the continuity check (test hook).
        #[arg(long, hide = true)]
        psi2_threshold: Option<f64>,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_SELFTEST: u8 = 3;

fn load(common: &Common) -> Result<RunConfig, ConfigError> {
    let flags = FlagOverrides {
        out: common.out.clone(),
        threads: common.threads,
        seed: common.seed,
        quiet: common.quiet,
    };
    RunConfig::load(common.config.as_deref(), &common.set, std::env::vars(), &flags)
}

fn main() -> ExitCode {
    ExitCode::from(run_cli(std::env::args_os()))
}

/// Parses `args` (program name first), runs the command and returns the exit code.
fn run_cli<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { EXIT_CONFIG } else { 0 };
        }
    };
    let (common, command) = match &cli.command {
        Sub::Selftest { quiet, psi2_threshold } => {
            return if commands::selftest(*quiet, *psi2_threshold) { 0 } else { EXIT_SELFTEST };
        }
        Sub::Run(c) => (c, Command::Run),
        Sub::Converge(c) => (c, Command::Converge),
        Sub::Spatial(c) => (c, Command::Spatial),
        Sub::Efficiency(c) => (c, Command::Efficiency),
    };
    let config = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match commands::execute(command, &config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            }
        }
    }
}
