//! `proxpareto` command-line tool.
//!
//! Exit codes: 0 success, 1 parse or validation error, 2 negative verdict,
//! 3 precondition failure.

mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use proxpareto::error::Error;
use proxpareto::report::RunReport;

use commands::{Outcome, Status};

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "proxpareto", version, about = "Nonsmooth multiobjective analysis and proximal point solver")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Tolerance: certificate stationarity (`certify`) or step size (`solve`)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for every randomized procedure
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Overrides the lattice step declared in the problem file
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,
    /// Use λ instead of 2λ as the prox-gradient factor when certifying
    #[arg(long, global = true)]
    pub paper_literal: bool,
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Write the JSON run report to this path
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Print the JSON run report instead of the table
    #[arg(long, global = true)]
    #[serde(skip)]
    pub json: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Evaluate functions at a point
    Eval(PointArgs),
    /// Fréchet, limiting, singular and Clarke subdifferentials
    Subdiff(PointArgs),
    /// Directional Lipschitz classification
    Dirlip(DirlipArgs),
    /// Pareto set on the declared lattice
    Pareto(ParetoArgs),
    /// Build the proximal regularization and evaluate it
    Regularize(RegularizeArgs),
    /// Multiplier certificate for a candidate point
    Certify(CertifyArgs),
    /// Run the proximal point method
    Solve(SolveArgs),
    /// Run the bundled regression corpus
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct PointArgs {
    /// Problem file path or bundled problem name
    pub problem: String,
    /// Point, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub at: Vec<f64>,
    /// Function id (defaults to every objective)
    #[arg(long)]
    pub function: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct DirlipArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Samples per level
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct ParetoArgs {
    pub problem: String,
    /// Use the regularized problem (objectives Ψ over D)
    #[arg(long)]
    pub regularized: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct RegularizeArgs {
    pub problem: String,
    /// Evaluate Ψ, Φ and membership in D here
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub at: Option<Vec<f64>>,
    /// Scan φ_γ over the lattice for the point given by `--at`
    #[arg(long, requires = "at")]
    pub gamma: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct CertifyArgs {
    pub problem: String,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub at: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    pub problem: String,
    /// Starting point
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x0: Vec<f64>,
    /// Prox parameter (defaults to the file's regularization block, else 1)
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {
    /// Restrict to these bundled problems
    #[arg(long = "only")]
    pub only: Vec<String>,
    /// Also write one report per problem into this directory
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Subdiff(_) => "subdiff",
            Command::Dirlip(_) => "dirlip",
            Command::Pareto(_) => "pareto",
            Command::Regularize(_) => "regularize",
            Command::Certify(_) => "certify",
            Command::Solve(_) => "solve",
            Command::Selftest(_) => "selftest",
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Precondition(_) | Error::NotLipschitz { .. } | Error::BlowUp | Error::Unsupported(_)) => 3,
        _ => 1,
    }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.write_all(b"\n")?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<Status> {
    let start = Instant::now();
    let Outcome {
        inputs,
        outputs,
        table,
        status,
    } = commands::dispatch(&cli.command, &cli.global)?;
    let inputs = serde_json::json!({
        "command": cli.command.name(),
        "args": &cli.command,
        "global": &cli.global,
        "problem": inputs,
    });
    let report = RunReport::new(cli.command.name(), &inputs, outputs, start.elapsed().as_secs_f64(), cli.global.seed);
    let json = report.to_json()?;
    if let Some(path) = &cli.global.out {
        write_atomic(path, &json)?;
    }
    if cli.global.json {
        println!("{json}");
    } else {
        print!("{table}");
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.global.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(e.into()),
        },
        None => run(&cli),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Negative) => ExitCode::from(2),
        Ok(Status::Precondition) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
