//! `arithsphere`: enumerate shells, evaluate exponential sums, apply averages,
//! probe multipliers and estimate norms.

mod cmd;
mod context;
mod select;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use arithsphere::operators::Budget;
use arithsphere::Strategy;
use clap::{Parser, Subcommand};

use crate::context::Context;

#[derive(Parser)]
#[command(
    name = "arithsphere",
    version,
    about = "Discrete spherical averages on Z^d"
)]
struct Cli {
    /// Shell cache directory.
    #[arg(long, global = true, env = "ARITHSPHERE_CACHE")]
    cache: Option<PathBuf>,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (all cores when absent).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    /// Largest shell materialized, in points.
    #[arg(long, global = true, default_value_t = 1 << 24)]
    max_points: usize,

    /// Largest dense grid, in cells.
    #[arg(long, global = true, default_value_t = Budget::default().max_cells)]
    max_cells: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate, count or list regular values of lattice shells.
    Shell(cmd::shell::ShellArgs),
    /// Ramanujan, Gauss and Kloosterman sums.
    Sums(cmd::sums::SumsArgs),
    /// Apply A_λ or the maximal operator to a grid.
    Avg(cmd::avg::AvgArgs),
    /// Main-term multiplier: evaluation, error scan, kernel identity, low/high split.
    Mult(cmd::mult::MultArgs),
    /// Norm estimates, exponent fits, bound calculators, restricted weak-type tables.
    Norm(cmd::norm::NormArgs),
    /// Merge experiment outputs into a summary with predicted exponents.
    Report(cmd::report::ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Shell(_) => "shell",
            Command::Sums(_) => "sums",
            Command::Avg(_) => "avg",
            Command::Mult(_) => "mult",
            Command::Norm(_) => "norm",
            Command::Report(_) => "report",
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        arithsphere::exec::init_threads(n)?;
    }
    let ctx = Context {
        strategy: if cli.sequential {
            Strategy::Sequential
        } else {
            Strategy::default()
        },
        cache: cli.cache,
        max_points: cli.max_points,
        budget: Budget {
            max_cells: cli.max_cells,
        },
        out: cli.out,
    };
    match cli.command {
        Command::Shell(a) => cmd::shell::run(&ctx, a),
        Command::Sums(a) => cmd::sums::run(&ctx, a),
        Command::Avg(a) => cmd::avg::run(&ctx, a),
        Command::Mult(a) => cmd::mult::run(&ctx, a),
        Command::Norm(a) => cmd::norm::run(&ctx, a),
        Command::Report(a) => cmd::report::run(&ctx, a),
    }
}

fn error_json(error: &str, command: &str, detail: String) {
    let v = serde_json::json!({ "error": error, "command": command, "detail": detail });
    eprintln!("{v}");
}

fn main() -> ExitCode {
    let command = std::env::args().nth(1).unwrap_or_default();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_json("usage", &command, e.to_string().trim().to_string());
            return ExitCode::from(2);
        }
    };
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<arithsphere::Error>())
                .map_or_else(|| cmd::kind_of(&e), |k| k.kind());
            error_json(kind, name, format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}
