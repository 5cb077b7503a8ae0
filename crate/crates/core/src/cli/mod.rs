//! Command-line front end: scenario files, figure reproduction and the
//! randomized verification suites.
//!
//! Exit codes: 0 success, 1 output not writable, 2 configuration or usage
//! error, 3 solver failure, 4 verification failure.

mod commands;
pub mod config;
mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::{
    figure_config, format_reports, reproduce, run_scenario, verify, Suite, FIG2_SCALES, LEMMA_DIM,
};
pub use config::ScenarioConfig;
pub use table::ResultTable;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] crate::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "macgame",
    version,
    about = "Power allocation games on fading MIMO multiple-access channels"
)]
pub struct Cli {
    /// Worker threads; 0 uses every core. Overrides `mc.threads`.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the game of a scenario file over its p grid.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the effective configuration and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Randomized checks of the inequalities behind equilibrium uniqueness.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Regenerate the curves of a figure as CSV.
    Reproduce {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        figure: u8,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            dump_config,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            if dump_config {
                return emit(&cfg.effective()?.to_toml(), out.as_deref());
            }
            let table =
                with_threads(cli.threads.unwrap_or(cfg.mc.threads), || run_scenario(&cfg))??;
            emit(&table.to_csv(), out.as_deref())?;
            eprintln!("{} rows, scenario {}", table.rows.len(), cfg.hash()?);
            Ok(())
        }
        Command::Verify {
            suite,
            trials,
            seed,
        } => {
            let reports = with_threads(cli.threads.unwrap_or(0), || verify(suite, trials, seed))??;
            print!("{}", format_reports(&reports));
            let failed: Vec<&str> = reports
                .iter()
                .filter(|r| !r.passed())
                .map(|r| r.name.as_str())
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(failed.join("; ")))
            }
        }
        Command::Reproduce {
            figure,
            trials,
            seed,
            out,
        } => {
            let table =
                with_threads(cli.threads.unwrap_or(0), || reproduce(figure, trials, seed))??;
            emit(&table.to_csv(), out.as_deref())?;
            if let Some(path) = &out {
                eprintln!(
                    "figure {figure}: {} rows written to {}",
                    table.rows.len(),
                    path.display()
                );
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
