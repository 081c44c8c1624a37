//! `otto`: quantum Otto cycles with identical multilevel particles.
//!
//! Exit codes: 0 ok, 1 validation failure, 2 bad arguments, 3 empty state
//! space, 4 I/O error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use otto_core::Error;

#[derive(Debug, Parser)]
#[command(name = "otto", version, about = "Quantum Otto heat engines with identical multilevel particles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one cycle and print corner energies, heats, work and efficiency.
    Cycle(EngineArgs),
    /// Compare the work of M particles with a single particle.
    Ratio(RatioArgs),
    /// Write a CSV sweep over the hot-bath temperature.
    Sweep(SweepArgs),
    /// Run the built-in consistency checks.
    Validate,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// key=value file supplying defaults for any of these flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// box | harmonic | relativistic-box | quartic
    #[arg(long)]
    pub spectrum: Option<String>,
    /// boson | fermion | distinguishable
    #[arg(long)]
    pub stats: Option<String>,
    /// Particle count M
    #[arg(long)]
    pub particles: Option<usize>,
    /// Single-particle level count N
    #[arg(long)]
    pub levels: Option<usize>,
    /// Narrow width (hot isochore)
    #[arg(long = "L1", allow_negative_numbers = true)]
    pub l1: Option<f64>,
    /// Compression ratio L2/L1
    #[arg(long = "R", allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Cold bath temperature
    #[arg(long = "Tc", allow_negative_numbers = true)]
    pub tc: Option<f64>,
    /// Hot bath temperature
    #[arg(long = "Th", allow_negative_numbers = true)]
    pub th: Option<f64>,
    /// Energy scale c in E_n = c g(n) / L^p
    #[arg(long, allow_negative_numbers = true)]
    pub scale: Option<f64>,
    /// Regime parameter c/(L1^p Tc); fixes L1 = Tc = 1 and scale = lambda
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// enumeration | recursion | auto
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Preset: 2, 3, 4, 5, 6 or 7
    #[arg(long)]
    pub figure: Option<u32>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Lowest hot temperature, in units of Tc
    #[arg(long = "Th-min", allow_negative_numbers = true)]
    pub th_min: Option<f64>,
    /// Highest hot temperature, in units of Tc
    #[arg(long = "Th-max", allow_negative_numbers = true)]
    pub th_max: Option<f64>,
    /// Number of grid points (>= 2)
    #[arg(long)]
    pub steps: Option<usize>,
    /// system (W/Ws) or particle (W/(M Ws))
    #[arg(long)]
    pub normalize: Option<String>,
    /// CSV output path
    #[arg(long)]
    pub output: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Evaluate grid points on one thread
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Unsupported(_) => 2,
            Error::EmptyStateSpace { .. } => 3,
            Error::NumericalCancellation { .. } | Error::BackendMismatch { .. } => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", first.trim());
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Cycle(args) => commands::cycle(&args),
        Command::Ratio(args) => commands::ratio(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Validate => commands::validate(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
