#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use painleve3_core::{make_point, MonodromyPoint, C64};
use std::path::PathBuf;
use std::process::ExitCode;

/// Solutions of the sinh-Gordon reduction θf = 2fg, θg = 2x²(f² − f⁻²)
/// from their monodromy data, and back.
#[derive(Parser, Debug)]
#[command(name = "painleve3", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Real stratum, predicted event pattern and TERP flags.
    Classify(commands::ClassifyArgs),
    /// Eigenvalues, exponents and structure matrices for a Stokes parameter.
    Spectral(commands::SpectralArgs),
    /// Integrate the solution of a monodromy point along the positive ray.
    Flow(commands::FlowArgs),
    /// Recover (s, B) from initial data (x, f, g).
    Monodromy(commands::MonodromyArgs),
    /// Seed, flow, and recover the monodromy data again.
    Roundtrip(commands::RoundtripArgs),
    /// Small-x expansion and predicted zero/pole ladder.
    Asymptotics(commands::AsymptoticsArgs),
    /// Event locations x_k over a grid of real monodromy points.
    Sheets(commands::SheetsArgs),
    /// Check the symmetry group relations at a point.
    SymmetryCheck(commands::SymmetryArgs),
}

/// A monodromy point given as (s, b1, b2) or, on the real family, as (s, b5, b6).
#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Stokes parameter, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    s: Option<C64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    b1: Option<C64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    b2: Option<C64>,
    /// Real form: b5 = b1 + s b2 / 2.
    #[arg(long, allow_hyphen_values = true)]
    b5: Option<f64>,
    /// Real form: b6 = i b2.
    #[arg(long, allow_hyphen_values = true)]
    b6: Option<f64>,
    /// Tolerance on b1² + b2² + s b1 b2 = 1.
    #[arg(long, default_value_t = 1e-6)]
    constraint_tol: f64,
}

/// Invalid invocation beyond what clap checks; exits with code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Usage(pub String);

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Usage(msg.into()).into())
}

impl PointArgs {
    pub fn point(&self) -> anyhow::Result<MonodromyPoint> {
        let s = match self.s {
            Some(s) => s,
            None => return usage("--s is required"),
        };
        match (self.b1, self.b2, self.b5, self.b6) {
            (Some(b1), Some(b2), None, None) => Ok(make_point(s, b1, b2, self.constraint_tol)?),
            (None, None, Some(b5), Some(b6)) => {
                if s.im != 0.0 {
                    return usage("the real form (--b5, --b6) needs a real --s");
                }
                Ok(MonodromyPoint::from_real_form(s.re, b5, b6, self.constraint_tol)?)
            }
            _ => usage("give exactly one of (--b1, --b2) or (--b5, --b6)"),
        }
    }
}

pub fn parse_complex(text: &str) -> Result<C64, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {text:?}")),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<painleve3_core::Error>() {
        Some(e) if e.is_validation() => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PAINLEVE3_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let ctx = commands::Ctx {
        format: cli.format,
        out: cli.out.clone(),
    };
    let result = match &cli.command {
        Command::Classify(a) => commands::classify(&ctx, a),
        Command::Spectral(a) => commands::spectral(&ctx, a),
        Command::Flow(a) => commands::flow(&ctx, a),
        Command::Monodromy(a) => commands::monodromy(&ctx, a),
        Command::Roundtrip(a) => commands::roundtrip(&ctx, a),
        Command::Asymptotics(a) => commands::asymptotics(&ctx, a),
        Command::Sheets(a) => commands::sheets(&ctx, a),
        Command::SymmetryCheck(a) => commands::symmetry_check(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
