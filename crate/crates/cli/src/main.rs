use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod input;
mod output;

/// Failure classes, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{misses} Monte Carlo interval(s) missed the Fourier value")]
    CiMiss { report: String, misses: usize },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Invalid(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::CiMiss { .. } => 5,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dgn-risk",
    version,
    about = "Delta-Gamma-Normal portfolio risk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every Fourier computation.
#[derive(Args, Clone, Copy)]
pub struct Engine {
    /// Imaginary part of the integration contour, inside (0, nu_plus).
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Absolute quadrature tolerance; overrides RISK_QUAD_TOL.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize a raw portfolio and report its distribution profile.
    Remap { input: PathBuf },
    /// VaR and ES at each level.
    Risk {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<f64>,
        #[command(flatten)]
        engine: Engine,
    },
    /// VaR and ES sensitivities to every parameter at one level.
    Sens {
        input: PathBuf,
        #[arg(long)]
        level: f64,
        #[command(flatten)]
        engine: Engine,
    },
    /// Density on a uniform grid, optionally with the fitted left-tail asymptote.
    Pdf {
        input: PathBuf,
        /// `lo:hi`
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        overlay_tail: bool,
        #[command(flatten)]
        engine: Engine,
    },
    /// Fourier results against Monte Carlo estimates and their intervals.
    Mc {
        input: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 0.98)]
        cl: f64,
        /// Parameters such as `theta,delta_1,lambda_3`, or `all`.
        #[arg(long, value_delimiter = ',')]
        sens: Vec<String>,
        /// Finite-difference shock; defaults to max(1% of the parameter, 0.01).
        #[arg(long)]
        shock: Option<f64>,
        /// Exit 0 even when an interval misses.
        #[arg(long)]
        no_strict: bool,
        #[command(flatten)]
        engine: Engine,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Remap { input } => commands::remap(&input),
        Command::Risk {
            input,
            levels,
            engine,
        } => commands::risk(&input, &levels, engine),
        Command::Sens {
            input,
            level,
            engine,
        } => commands::sens(&input, level, engine),
        Command::Pdf {
            input,
            range,
            points,
            overlay_tail,
            engine,
        } => commands::pdf(&input, &range, points, overlay_tail, engine),
        Command::Mc {
            input,
            samples,
            seed,
            levels,
            cl,
            sens,
            shock,
            no_strict,
            engine,
        } => commands::mc(
            &input,
            &commands::McOptions {
                samples,
                seed,
                levels,
                cl,
                sens,
                shock,
                strict: !no_strict,
            },
            engine,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            // a missed interval still leaves a useful report
            if let CliError::CiMiss { report, .. } = &e {
                print!("{report}");
            }
            eprintln!("dgn-risk: {e}");
            ExitCode::from(e.code())
        }
    }
}
