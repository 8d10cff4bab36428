//! `fe-accuracy`: command-line front end for the fe-accuracy library.
//!
//! Exit codes: 0 success, 1 a verified bound failed, 2 usage error,
//! 3 numeric-domain error, 4 internal error.

mod commands;
mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fe_accuracy::table::Table;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    /// Rejected by the argument parser, which has already reported it.
    #[error("invalid arguments")]
    Arguments,
    #[error(transparent)]
    Library(#[from] fe_accuracy::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Arguments => 2,
            CliError::Library(fe_accuracy::Error::Usage(_) | fe_accuracy::Error::Parse(_)) => 2,
            CliError::Library(_) => 3,
            CliError::Io(_) | CliError::Internal(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "fe-accuracy", version, about = "Relative accuracy of Lagrange finite elements")]
#[command(args_override_self = true)]
struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// JSON object of default flag values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the Pk basis at a point, or list the lattice nodes.
    #[command(args_override_self = true)]
    Basis(BasisArgs),
    /// Check the pointwise basis bounds and the nodal polynomial bound.
    #[command(args_override_self = true)]
    Bounds(BoundsArgs),
    /// L2 and H1 semi-norms of every basis function on a simplex.
    #[command(args_override_self = true)]
    Seminorms(SeminormsArgs),
    /// Critical mesh sizes h*_q of P_k against P_{k+q}.
    #[command(args_override_self = true)]
    Hstar(HstarArgs),
    /// Step, sigmoid and Monte Carlo probability curves.
    #[command(args_override_self = true)]
    Laws(LawsArgs),
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite positive number, got {s}"))
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["eval", "nodes"])))]
pub struct BasisArgs {
    #[arg(long, value_parser = positive_usize)]
    pub n: usize,
    #[arg(long, value_parser = positive_usize)]
    pub k: usize,
    /// Comma-separated barycentric coordinates λ_1,...,λ_{n+1}.
    #[arg(long, allow_hyphen_values = true)]
    pub eval: Option<String>,
    /// List the lattice nodes and check the Kronecker property.
    #[arg(long)]
    pub nodes: bool,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_parser = positive_usize)]
    pub n: usize,
    #[arg(long, value_parser = positive_usize)]
    pub k: usize,
    #[arg(long, default_value_t = 10_000, value_parser = positive_usize)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SeminormsArgs {
    #[arg(long, value_parser = positive_usize)]
    pub n: usize,
    #[arg(long, value_parser = positive_usize)]
    pub k: usize,
    /// JSON file `{"vertices": [[...], ...]}`; the reference simplex if omitted.
    #[arg(long)]
    pub vertices: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HstarArgs {
    #[arg(long, default_value_t = 2, value_parser = positive_usize)]
    pub k: usize,
    #[arg(long = "q-max", value_parser = positive_usize)]
    pub q_max: usize,
    /// `builtin-sine` or a JSON provider file.
    #[arg(long, default_value = "builtin-sine")]
    pub model: String,
    /// Continuity constant.
    #[arg(long = "M", default_value_t = 1.0, value_parser = positive_f64)]
    pub continuity: f64,
    /// Coercivity constant.
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub alpha: f64,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2, value_parser = positive_f64)]
    pub diam: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2, value_parser = positive_usize)]
    pub n: usize,
    /// Semi-norm ratio limit used for the asymptote.
    #[arg(long, value_parser = positive_f64)]
    pub l: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    Linear,
    Log,
}

#[derive(Debug, Args)]
pub struct LawsArgs {
    #[arg(long, value_parser = positive_f64)]
    pub hstar: Option<f64>,
    #[arg(long, value_parser = positive_usize)]
    pub q: Option<usize>,
    #[arg(long = "h-min", value_parser = positive_f64)]
    pub h_min: f64,
    #[arg(long = "h-max", value_parser = positive_f64)]
    pub h_max: f64,
    #[arg(long, default_value_t = 100, value_parser = positive_usize)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Grid::Linear)]
    pub grid: Grid,
    /// Monte Carlo samples per grid point.
    #[arg(long)]
    pub montecarlo: Option<usize>,
    #[arg(long, value_parser = positive_f64, requires_all = ["cm", "k", "m"])]
    pub ck: Option<f64>,
    #[arg(long, value_parser = positive_f64, requires_all = ["ck", "k", "m"])]
    pub cm: Option<f64>,
    #[arg(long, value_parser = positive_usize, requires_all = ["ck", "cm", "m"])]
    pub k: Option<usize>,
    #[arg(long, value_parser = positive_usize, requires_all = ["ck", "cm", "k"])]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// A finished command: the tabular form, the JSON form and an optional
/// human-readable summary printed on standard error for CSV output.
pub struct Report {
    pub table: Table,
    pub json: Value,
    pub summary: Option<String>,
    pub passed: bool,
    pub default_format: Format,
}

fn write_report(report: &Report, format: Option<Format>, output: Option<&PathBuf>) -> Result<(), CliError> {
    let format = format.unwrap_or(report.default_format);
    let mut sink: Box<dyn Write> = match output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => {
            report
                .table
                .write_csv(&mut sink)
                .map_err(|e| CliError::Io(io::Error::other(e)))?;
            if let Some(summary) = &report.summary {
                eprintln!("{summary}");
            }
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(&report.json)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            writeln!(sink, "{text}")?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn run(args: Vec<std::ffi::OsString>) -> Result<bool, CliError> {
    let args = config::expand(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code == 0 {
                return Ok(true);
            }
            return Err(CliError::Arguments);
        }
    };
    let report = match &cli.command {
        Command::Basis(a) => commands::basis(a)?,
        Command::Bounds(a) => commands::bounds(a)?,
        Command::Seminorms(a) => commands::seminorms(a)?,
        Command::Hstar(a) => commands::hstar(a)?,
        Command::Laws(a) => commands::laws(a)?,
    };
    write_report(&report, cli.format, cli.output.as_ref())?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if !matches!(e, CliError::Arguments) {
                eprintln!("fe-accuracy: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
