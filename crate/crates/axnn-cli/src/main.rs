//! axnn: train, evaluate, and decompose adaptive explainable neural networks.
//!
//! Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 data/schema
//! error, 5 I/O error.

mod commands;
mod manifest;
mod plot;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "axnn", version, about = "Adaptive explainable neural networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset (plus its true components)
    Gen(GenArgs),
    /// Train a model from train/valid CSVs
    Train(TrainArgs),
    /// Evaluate a model on a test CSV
    Eval(EvalArgs),
    /// Decompose a model into effect tables, importance ranking, and plots
    Decompose(DecomposeArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Generator: simple | ex1 | ex2 | ex3 | ex4
    #[arg(long)]
    example: String,
    /// Number of samples
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian noise standard deviation (default: 0.1 for simple, 0 for ex1-4)
    #[arg(long)]
    noise: Option<f64>,
    /// Output CSV path; the true components go to <out>.components.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// JSON config file mirroring the run configuration; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    valid: PathBuf,
    /// Target column name
    #[arg(long, default_value = "y")]
    target: String,
    /// Output model path (JSON)
    #[arg(long)]
    out: PathBuf,
    /// Training log CSV (default: <out stem>.log.csv)
    #[arg(long)]
    log: Option<PathBuf>,
    /// Run manifest path (default: <out stem>.manifest.json)
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// boosting | stacking | one-stage
    #[arg(long)]
    mode: Option<String>,
    /// squared | logistic
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for candidate fitting (results are worker-count invariant)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    j1_max: Option<usize>,
    #[arg(long)]
    j2_max: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta_penalty: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "y")]
    target: String,
    /// mse | auc (defaults to the model's task)
    #[arg(long)]
    metrics: Option<String>,
    /// Optional metrics JSON output path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    model: PathBuf,
    /// Reference data CSV (must include the target column)
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "y")]
    target: String,
    /// Report directory
    #[arg(long)]
    out: PathBuf,
    /// Active-set threshold
    #[arg(long, default_value_t = 0.2)]
    theta: f64,
    /// Comma-separated thresholds for a sweep table, e.g. 0.15,0.2,0.3
    #[arg(long)]
    sweep: Option<String>,
    /// Grid resolution for effect curves and surfaces
    #[arg(long, default_value_t = 50)]
    grid: usize,
    /// Threshold raw projection coefficients instead of L2-normalized ones
    #[arg(long, default_value_t = false)]
    raw_beta: bool,
}

fn exit_code(err: &axnn::Error) -> i32 {
    use axnn::Error::*;
    match err {
        Divergence(_) | DegenerateModel(_) => 3,
        Io(_) => 5,
        _ => 4,
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AXNN_LOG", "info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Decompose(args) => commands::decompose(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
