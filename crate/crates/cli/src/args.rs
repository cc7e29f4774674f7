use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sketchcoach_core::optimize::{LossWeights, Objective, Strategy};
use sketchcoach_core::pipeline::MethodSequence;

#[derive(Debug, Parser)]
#[command(name = "sketchcoach", version, about = "Optimize hand-drawn sketches for a fixed classifier")]
pub struct Cli {
    /// Worker threads for per-sample work (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write procedurally generated QuickDraw-format drawings.
    Synth(SynthArgs),
    /// Train the classifier on QuickDraw-format drawing files.
    Train(TrainArgs),
    /// Optimize each sketch of a file and write one proposal per line.
    Optimize(OptimizeArgs),
    /// Tabulate accuracy, noisy accuracy and losses for proposals.
    Evaluate(EvaluateArgs),
    /// Remove a fixed share of segments regardless of classification and report accuracy.
    Keep(KeepArgs),
    /// Render sketches or proposals as numbered SVG drawing instructions.
    Render(RenderArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

pub fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        Ok(v) => Err(format!("{v} is not a finite value >= 0")),
        Err(e) => Err(e.to_string()),
    }
}

pub fn fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        Ok(v) => Err(format!("{v} is outside [0, 1]")),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(v) => Err(format!("{v} is not a finite value > 0")),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_strategy_or_continuous(s: &str) -> Result<String, String> {
    if s == "continuous" || s.parse::<Strategy>().is_ok() {
        Ok(s.to_string())
    } else {
        Err(format!(
            "unknown method {s:?}; expected one of removal-cl, removal-ce, removal-ra, removal-ro, removal-so, reverse, permute, both, continuous"
        ))
    }
}

fn parse_sequence(s: &str) -> Result<String, String> {
    s.parse::<MethodSequence>().map(|_| s.to_string()).map_err(|e| e.to_string())
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse().map_err(|e: sketchcoach_core::optimize::OptimizeError| e.to_string())
}

fn parse_weights(s: &str) -> Result<LossWeights, String> {
    s.parse().map_err(|e: sketchcoach_core::optimize::OptimizeError| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Drawings per class.
    #[arg(long, default_value_t = 2256, value_parser = positive_usize)]
    pub per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// QuickDraw simplified-drawing files (one record per line).
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    /// Where to write the trained model.
    #[arg(long)]
    pub model_out: PathBuf,
    /// Optional file for the test split (one canonical sketch per line).
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    /// Optional file for the split manifest.
    #[arg(long)]
    pub manifest_out: Option<PathBuf>,
    /// Share of each class used for training; the rest is the test split.
    #[arg(long, default_value_t = 2000.0 / 2256.0, value_parser = fraction)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 20, value_parser = positive_usize)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64, value_parser = positive_usize)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3, value_parser = positive_f64)]
    pub learning_rate: f64,
    /// Per-epoch learning-rate multiplier.
    #[arg(long, default_value_t = 0.9, value_parser = positive_f64)]
    pub lr_decay: f64,
    /// Share of the training split held out for reporting accuracy.
    #[arg(long, default_value_t = 0.1, value_parser = fraction)]
    pub holdout_fraction: f64,
    /// Seed for the split, initialization and batch order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Sketches to optimize, one canonical sketch per line; `class` names the target.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file, one proposal per line.
    #[arg(long)]
    pub out: PathBuf,
    /// Single method.
    #[arg(long, value_parser = parse_strategy_or_continuous, conflicts_with = "sequence")]
    pub method: Option<String>,
    /// Method sequence such as `D,B` or `B:100,C:250,B:100,C:250`.
    #[arg(long, value_parser = parse_sequence)]
    pub sequence: Option<String>,
    /// `effort` (minimize pen travel) or `accuracy` (minimize classifier loss).
    #[arg(long, default_value = "accuracy", value_parser = parse_objective)]
    pub objective: Objective,
    /// Distortion budget as a fraction of the original visible length.
    #[arg(long = "d", default_value_t = 0.2, value_parser = non_negative, allow_negative_numbers = true)]
    pub d: f64,
    /// Candidates per discrete stage (long offline runs use 20000).
    #[arg(long, default_value_t = 500, value_parser = positive_usize)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Loss weights for continuous stages: a preset (classifier, effort,
    /// classifier-effort, acc-best) or `c,p,e`.
    #[arg(long, default_value = "acc-best", value_parser = parse_weights)]
    pub beta: LossWeights,
    /// Largest per-point move per descent step, in canvas units.
    #[arg(long, default_value_t = 0.5, value_parser = positive_f64)]
    pub step_size: f64,
    /// Descent steps per continuous stage.
    #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
    pub steps: usize,
    /// Only optimize the first N sketches.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Proposal files; each adds a row.
    #[arg(long)]
    pub proposals: Vec<PathBuf>,
    /// Original sketches (canonical, one per line). Defaults to the originals
    /// stored in the first proposal file.
    #[arg(long)]
    pub originals: Option<PathBuf>,
    /// Noise radius in canvas units.
    #[arg(long = "r", default_value_t = 10.0, value_parser = non_negative, allow_negative_numbers = true)]
    pub r: f64,
    /// Noisy copies per sample.
    #[arg(long, default_value_t = 10, value_parser = positive_usize)]
    pub replicas: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Machine-readable report.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    /// Text table (also printed to stdout).
    #[arg(long)]
    pub table_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum KeepOrder {
    Cl,
    Ce,
    Random,
}

#[derive(Debug, Args, Serialize)]
pub struct KeepArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Share of segments kept.
    #[arg(long, value_parser = fraction)]
    pub keep: f64,
    #[arg(long, value_enum, default_value_t = KeepOrder::Cl)]
    pub order: KeepOrder,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub limit: Option<usize>,
    /// Optional file for the reduced sketches.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    /// Canonical sketches or proposals, one per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving one SVG per line.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// For proposals: side-by-side original and proposal with a caption.
    #[arg(long)]
    pub compare: bool,
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Directory with the browser UI bundle, served under `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Per-request bound on optimization iterations.
    #[arg(long, default_value_t = 500, value_parser = positive_usize)]
    pub iteration_cap: usize,
}
