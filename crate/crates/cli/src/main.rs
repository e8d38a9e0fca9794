//! `ddzeta`: residues, exact identity suites, continuation values, direct
//! sums, singular fits and zero tables from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 precondition violation,
//! 3 singular point, 4 zero table missing.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ddzeta::Error;

use crate::config::{OutputFormat, Overrides, RunConfig};
use crate::report::render;

#[derive(Parser, Debug)]
#[command(name = "ddzeta", version, about = "Double Dirichlet series twisted by the von Mangoldt and Moebius functions")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Config file of `key = value` lines (default: ./ddzeta.conf if present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Target decimal digits (>= 30).
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Zero ordinate file (fallback: $DDZETA_ZEROS, then the bundled table).
    #[arg(long, global = true)]
    zeros_file: Option<PathBuf>,
    /// Contour abscissa integer N.
    #[arg(long = "N", global = true)]
    n_contour: Option<u32>,
    /// Contour offset eta, decimal or fraction.
    #[arg(long, global = true)]
    eta: Option<String>,
    /// Contour half-length, decimal or "auto".
    #[arg(long = "T", global = true)]
    t: Option<String>,
    /// Number of zeros entering zero sums.
    #[arg(long, global = true)]
    max_zeros: Option<usize>,
    #[arg(long, value_enum, global = true)]
    output: Option<OutputFormat>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Residue at (-m, -n): exact rational for lambda, decimal for mu.
    Residue {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, default_value = "lambda")]
        series: String,
    },
    /// Exact identity suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: commands::Suite,
        #[arg(long, default_value_t = 40)]
        max: u32,
    },
    /// Value of the continuation with its term breakdown.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        s1: String,
        #[arg(long, allow_hyphen_values = true)]
        s2: String,
        #[arg(long, default_value = "lambda")]
        series: String,
    },
    /// Truncated direct double sum with a tail estimate.
    Oracle {
        #[arg(long, allow_hyphen_values = true)]
        s1: String,
        #[arg(long, allow_hyphen_values = true)]
        s2: String,
        #[arg(long, default_value = "lambda")]
        series: String,
        #[arg(long, default_value_t = 20_000)]
        cutoff: usize,
    },
    /// Fit c2/e^2 + c1/e + c0 to the continuation at (-m, -n + e).
    Fit {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "lambda")]
        series: String,
        #[arg(long, default_value = "1e-10")]
        ladder_start: String,
        #[arg(long, default_value_t = 8)]
        ladder_len: usize,
    },
    /// Import or validate a zero table.
    Zeros {
        /// Parse and report on a zero file.
        #[arg(long, conflicts_with = "validate")]
        import: Option<PathBuf>,
        /// Check |zeta(1/2 + i gamma)| for the first K zeros of the configured table.
        #[arg(long)]
        validate: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Singular(_) => 3,
        Error::ZerosMissing(_) => 4,
        Error::Validation(_) => 1,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Singular(_) => "singular",
        Error::ZerosMissing(_) => "zeros_missing",
        Error::Validation(_) => "validation",
        Error::Parity(_) => "parity",
        Error::Region { .. } => "region",
        Error::Parse { .. } | Error::Ordering { .. } => "parse",
        _ => "precondition",
    }
}

fn run(cli: Cli, cfg: &RunConfig) -> Result<commands::Outcome, commands::Failure> {
    use Command::*;
    match cli.command {
        Residue { m, n, series } => commands::residue(cfg, m, n, &series),
        Verify { suite, max } => commands::verify(suite, max),
        Eval { s1, s2, series } => commands::eval(cfg, &s1, &s2, &series),
        Oracle { s1, s2, series, cutoff } => commands::oracle(cfg, &s1, &s2, &series, cutoff),
        Fit { m, n, series, ladder_start, ladder_len } => commands::fit(cfg, m, n, &series, &ladder_start, ladder_len),
        Zeros { import, validate } => commands::zeros(cfg, import, validate),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let flags = Overrides {
        precision: g.precision,
        zeros_file: g.zeros_file.clone(),
        n: g.n_contour,
        eta: g.eta.clone(),
        t: g.t.clone(),
        max_zeros: g.max_zeros,
        output: g.output,
    };
    let format = g.output;
    let cfg = match RunConfig::resolve(g.config.as_deref(), &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ddzeta: {e}");
            return ExitCode::from(2);
        }
    };
    let format = format.unwrap_or(cfg.output);
    match run(cli, &cfg) {
        Ok(outcome) => {
            print!("{}", render(&outcome.output, format));
            ExitCode::from(outcome.code)
        }
        Err(f) => {
            eprintln!("ddzeta: {}", f.error);
            if format == OutputFormat::Json {
                let mut body = serde_json::json!({ "error": error_kind(&f.error), "message": f.error.to_string() });
                if let Some(detail) = f.detail {
                    body["detail"] = detail;
                }
                println!("{}", serde_json::to_string_pretty(&body).expect("JSON values always serialize"));
            }
            ExitCode::from(exit_code(&f.error))
        }
    }
}
