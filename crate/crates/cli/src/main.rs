//! `mather`: batch runs of the minimal average action computations.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure,
//! 3 a checked invariant was violated.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mather_core::io::{parse_omega, parse_window, RunConfig};
use mather_core::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Certification(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.to_path_buf(), message: err.to_string() }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
            CliError::Certification(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mather", version, about = "Minimal average action of standard-like twist maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep a real and/or complex frequency grid and write beta.csv.
    ComputeBeta(Common),
    /// Solve for one invariant curve and write curve.json and curve_grid.csv.
    SolveCurve(Common),
    /// Membership certificates and excluded intervals.
    CheckDiophantine(Common),
    /// Run the invariant suite and print a pass/fail table.
    Validate(Common),
    /// Write plot-ready tables.
    PlotData(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Frequency as RE or RE,IM.
    #[arg(long, value_name = "RE[,IM]", value_parser = omega_arg, allow_hyphen_values = true)]
    omega: Option<Complex64>,
    /// Real window as A,B.
    #[arg(long, value_name = "A,B", value_parser = window_arg, allow_hyphen_values = true)]
    window: Option<(f64, f64)>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; overrides `threads`.
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
    /// Solve at frequencies that fail the Diophantine check instead of skipping them.
    #[arg(long)]
    override_diophantine: bool,
}

fn omega_arg(s: &str) -> Result<Complex64, String> {
    parse_omega(s).map_err(|e| e.to_string())
}

fn window_arg(s: &str) -> Result<(f64, f64), String> {
    parse_window(s).map_err(|e| e.to_string())
}

/// Everything a subcommand needs, resolved from the config file and flags.
pub struct Context {
    pub cfg: RunConfig,
    pub omega: Option<Complex64>,
    pub window: Option<(f64, f64)>,
    pub out: PathBuf,
    pub override_diophantine: bool,
}

fn load(args: Common) -> Result<(Context, Option<usize>), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let cfg =
        RunConfig::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let threads = args.threads.or(cfg.threads);
    if threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    let out = args.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let ctx =
        Context { cfg, omega: args.omega, window: args.window, out, override_diophantine: args.override_diophantine };
    Ok((ctx, threads))
}

type Job = fn(&Context) -> Result<(), CliError>;

fn run(command: Command) -> Result<(), CliError> {
    let (args, job): (Common, Job) = match command {
        Command::ComputeBeta(a) => (a, commands::compute_beta),
        Command::SolveCurve(a) => (a, commands::solve_curve),
        Command::CheckDiophantine(a) => (a, commands::check_diophantine),
        Command::Validate(a) => (a, commands::validate),
        Command::PlotData(a) => (a, commands::plot_data),
    };
    let (ctx, threads) = load(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| job(&ctx))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
