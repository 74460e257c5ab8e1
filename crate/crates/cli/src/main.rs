//! `nwbound run` and `nwbound check`.

mod config;
mod experiment;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ConfigError;
use experiment::RunError;

#[derive(Parser)]
#[command(
    name = "nwbound",
    version,
    about = "Finite-bandwidth bias bounds for Nadaraya-Watson regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, evaluate the bounds and write CSV, plot script and manifest.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        /// Worker threads; falls back to NWBOUND_JOBS, then to all cores.
        #[arg(long, value_name = "INT")]
        jobs: Option<usize>,
    },
    /// Validate the config and print the resolved bound inputs.
    Check {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Override a config value, e.g. `--set ensemble.n=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn jobs(flag: Option<usize>) -> Result<usize, RunError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("NWBOUND_JOBS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| ConfigError::new("NWBOUND_JOBS", format!("expected a positive integer, got `{v}`")))?,
            Err(_) => return Ok(0),
        },
    };
    if n == 0 {
        return Err(ConfigError::new("--jobs", "must be at least 1").into());
    }
    Ok(n)
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Check { common } => {
            let loaded = experiment::prepare(&common.config, &common.overrides, common.seed)?;
            print!("{}", experiment::describe(&loaded));
            Ok(())
        }
        Command::Run {
            common,
            out,
            jobs: flag,
        } => {
            let threads = jobs(flag)?;
            let loaded = experiment::prepare(&common.config, &common.overrides, common.seed)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| RunError::Io(std::io::Error::other(e)))?;
            let threads = pool.current_num_threads();
            let files = pool.install(|| experiment::run(&loaded, &out, threads))?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nwbound: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
