//! `heatkernel`: evaluate the Dirichlet heat kernel on [0, 1], solve heat
//! problems by sine series or by Laplace inversion, and compare the two.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::output::Format;

const EXPR_HELP: &str = "\
Expressions (--f, --F) accept numbers, the constants pi and e, the variables x
and t, + - * / ^, unary minus, parentheses and the functions sin cos sinh cosh
exp sqrt abs. ^ binds tighter than unary minus and associates to the right, so
-2^2 = -4 and 2^3^2 = 512. There is no implicit multiplication.

Exit codes: 0 success, 2 usage, 3 numerical failure, 4 tolerance unreachable,
5 comparison tolerance exceeded.";

#[derive(Debug, Parser)]
#[command(name = "heatkernel", version, about, after_long_help = EXPR_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate g(s, x, y) from the complex kernel and the real closed forms.
    Kernel(KernelArgs),
    /// Solve a problem on an (x, t) grid.
    Solve(SolveArgs),
    /// Solve by both methods and report pointwise differences.
    Compare(CompareArgs),
    /// Tabulate sqrt(s) |g(s, x, x)| over a logarithmic sweep of s.
    Limit(LimitArgs),
    /// Run the invariant suite at reduced resolution.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// JSON file whose keys mirror the flags; flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Report wall-clock timings (JSON metadata, or stderr for CSV).
    /// Output is then no longer reproducible byte for byte.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct NumericsArgs {
    /// Inversion tolerance (for `compare`, the allowed maximum difference).
    #[arg(long)]
    tol: Option<f64>,
    /// Largest frequency cutoff of the inversion integral.
    #[arg(long)]
    s_max: Option<f64>,
    /// Maximum number of sine-series terms.
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long)]
    no_tail_subtraction: bool,
    /// Gauss panels per period 2π/t of the oscillatory factor.
    #[arg(long)]
    panels_per_period: Option<usize>,
    /// Times (and Duhamel propagation times) below this use the series.
    #[arg(long)]
    crossover: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct ProblemArgs {
    /// Catalog problem: eigen1, eigen2, eigen3, combo, forced-modal, singular, parabola.
    #[arg(long, conflicts_with_all = ["f", "forcing"])]
    problem: Option<String>,
    /// Initial data f(x).
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// Forcing F(x, t).
    #[arg(long = "F", id = "forcing", allow_hyphen_values = true)]
    forcing: Option<String>,
    /// The forcing is singular at t = 0 (integrate with sigma = u^2).
    #[arg(long)]
    singular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MethodArg {
    Series,
    Laplace,
}

#[derive(Debug, Args)]
struct KernelArgs {
    /// Frequencies, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    s: Vec<f64>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    y_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y_max: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    numerics: NumericsArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    numerics: NumericsArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct LimitArgs {
    /// Interior point, 0 < x < 1.
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long)]
    s_lo: Option<f64>,
    #[arg(long)]
    s_hi: Option<f64>,
    /// Number of log-spaced frequencies.
    #[arg(long)]
    ns: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Flip the sign of one addend (0..=7) of the g1 closed form before the
    /// oracle comparison. The suite must then fail.
    #[arg(long, value_name = "K", value_parser = clap::value_parser!(u8).range(0..8))]
    mutate_g1_term: Option<u8>,
}

/// An error with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const USAGE: u8 = 2;
    pub const NUMERICAL: u8 = 3;
    pub const UNREACHABLE: u8 = 4;
    pub const COMPARE: u8 = 5;

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: Self::NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<heatkernel::Error> for Failure {
    fn from(e: heatkernel::Error) -> Self {
        let code = match e {
            heatkernel::Error::ToleranceUnreachable { .. } => Self::UNREACHABLE,
            _ => Self::NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Kernel(a) => commands::kernel(a),
        Command::Solve(a) => commands::solve(a),
        Command::Compare(a) => commands::compare(a),
        Command::Limit(a) => commands::limit(a),
        Command::Selftest(a) => commands::selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
