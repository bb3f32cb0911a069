//! The `mexlab` command line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mexlab_core::analysis::{boundary_distance_stats, estimate_rho, hotelling_t2, BoundaryStats};
use mexlab_core::attacks::Outcome;
use mexlab_core::datasets::{load_matrix_csv, synth_halfspace, synth_rbf_labeled, synth_tree_labeled, write_csv, write_matrix_csv};
use mexlab_core::geometry::UnitVector;
use mexlab_core::oracle::ServerModel;

use crate::config::{ExperimentConfig, SweepSpec};
use crate::runner::{run_experiment_with, RunOptions};
use crate::sweep::{run_sweep, write_sweep_csv};
use crate::HarnessError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ATTACK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mexlab", version, about = "Model-extraction attack and defense experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment config and write its JSON report.
    Extract(ExtractArgs),
    /// Run a parameter sweep and write one CSV row per value.
    Sweep(SweepArgs),
    /// Estimate per-query flip probabilities of a randomized halfspace over a query log.
    Rho(RhoArgs),
    /// Statistical tests on sample matrices.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Synthesize a seeded dataset fixture.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock time per trial.
    #[arg(long)]
    pub timing: bool,
    /// Write the first trial's queries as CSV.
    #[arg(long)]
    pub query_log: Option<PathBuf>,
    /// Write the first trial's server model as JSON.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    /// CSV of query points (header row, one point per row).
    #[arg(long)]
    pub queries: PathBuf,
    /// Server halfspace: a JSON array or a serialized halfspace model.
    #[arg(long)]
    pub w_star: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Two-sample Hotelling T² test between two CSV sample matrices.
    Hotelling {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenKind {
    Halfspace,
    Tree,
    Rbf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the generating model as JSON.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => println!("{}", text.trim_end()),
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, HarnessError> {
    let mut s = serde_json::to_string_pretty(v).map_err(mexlab_core::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn read_w_star(path: &Path) -> Result<UnitVector, HarnessError> {
    let text = fs::read_to_string(path)?;
    let bad = |e: String| HarnessError::Config(format!("{}: {e}", path.display()));
    if let Ok(w) = serde_json::from_str::<UnitVector>(&text) {
        return Ok(w);
    }
    match serde_json::from_str::<ServerModel>(&text).map_err(|e| bad(e.to_string()))? {
        ServerModel::Halfspace(h) => Ok(h.w),
        _ => Err(bad("model is not a halfspace".into())),
    }
}

fn extract(args: &ExtractArgs) -> Result<i32, HarnessError> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let capture = args.query_log.is_some() || args.truth_out.is_some();
    let opts = RunOptions { timing: args.timing, capture_first_trial: capture };
    let (record, captured) = run_experiment_with(&cfg, opts)?;
    if let Some(c) = &captured {
        if let Some(p) = &args.query_log {
            write_matrix_csv(&c.queries, p)?;
        }
        if let Some(p) = &args.truth_out {
            fs::write(p, to_json(&c.truth)?)?;
        }
    }
    emit(args.out.as_deref(), &to_json(&record)?)?;
    let failed = record.trials.iter().any(|t| t.outcome != Outcome::Success || t.error.is_some());
    Ok(if failed { EXIT_ATTACK_FAILED } else { EXIT_OK })
}

fn sweep(args: &SweepArgs) -> Result<i32, HarnessError> {
    let spec = SweepSpec::load(&args.config)?;
    let rows = run_sweep(&spec, RunOptions::default())?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, spec.axis, &mut buf)?;
    emit(args.out.as_deref(), &String::from_utf8(buf).expect("CSV is ASCII"))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RhoSummary {
    n_points: usize,
    sigma: f64,
    samples: u64,
    mean_rho: f64,
    min_rho: f64,
    max_rho: f64,
    boundary: BoundaryStats,
}

fn rho(args: &RhoArgs) -> Result<i32, HarnessError> {
    let w = read_w_star(&args.w_star)?;
    let points = load_matrix_csv(&args.queries).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rhos = Vec::new();
    for x in points.iter().filter(|x| x.iter().any(|v| *v != 0.0)) {
        rhos.push(estimate_rho(&w, x, args.sigma, args.samples, &mut rng)?.rho_hat);
    }
    if rhos.is_empty() {
        return Err(HarnessError::Config("query log has no nonzero points".into()));
    }
    let summary = RhoSummary {
        n_points: rhos.len(),
        sigma: args.sigma,
        samples: args.samples,
        mean_rho: rhos.iter().sum::<f64>() / rhos.len() as f64,
        min_rho: rhos.iter().copied().fold(f64::INFINITY, f64::min),
        max_rho: rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        boundary: boundary_distance_stats(&points, &w)?,
    };
    emit(args.out.as_deref(), &to_json(&summary)?)?;
    Ok(EXIT_OK)
}

fn stats(cmd: &StatsCommand) -> Result<i32, HarnessError> {
    match cmd {
        StatsCommand::Hotelling { a, b, out } => {
            let load = |p: &PathBuf| load_matrix_csv(p).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())));
            let result = hotelling_t2(&load(a)?, &load(b)?)?;
            emit(out.as_deref(), &to_json(&result)?)?;
            Ok(EXIT_OK)
        }
    }
}

fn generate(args: &GenArgs) -> Result<i32, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (ds, model) = match args.kind {
        GenKind::Halfspace => {
            let (ds, h) = synth_halfspace(args.d, args.n, &mut rng)?;
            (ds, Some(ServerModel::Halfspace(h)))
        }
        GenKind::Tree => {
            let (ds, t) = synth_tree_labeled(args.d, args.n, args.depth, args.classes, &mut rng)?;
            (ds, Some(ServerModel::DecisionTree(t)))
        }
        GenKind::Rbf => (synth_rbf_labeled(args.d, args.n, &mut rng)?, None),
    };
    write_csv(&ds, &args.out)?;
    if let (Some(p), Some(m)) = (&args.model_out, model) {
        fs::write(p, to_json(&m)?)?;
    }
    Ok(EXIT_OK)
}

/// Runs a parsed command and maps errors to exit codes.
pub fn execute(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Extract(a) => extract(a),
        Command::Sweep(a) => sweep(a),
        Command::Rho(a) => rho(a),
        Command::Stats(c) => stats(c),
        Command::Gen(a) => generate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mexlab: {e}");
            EXIT_USAGE
        }
    }
}

/// Entry point: parses `argv` (program name first) and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
