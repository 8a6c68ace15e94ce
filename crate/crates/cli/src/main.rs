mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qfilter", version, about = "Train and evaluate question filters distilled from a QA teacher")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write its hidden teacher.
    Generate(GenerateArgs),
    /// Split a dataset into train, dev and test files.
    Split(SplitArgs),
    /// Fill in teacher scores for every question.
    Score(ScoreArgs),
    /// Train a filter model.
    Train(TrainArgs),
    /// Pick the filter threshold on a dev split.
    Calibrate(CalibrateArgs),
    /// Compare the answer model with and without the filter.
    Evaluate(EvaluateArgs),
    /// Write a precision/recall curve as CSV.
    Sweep(SweepArgs),
    /// Answer-model batches saved by filtering.
    Cost(CostArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Number of questions.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Dataset output path (JSON Lines).
    #[arg(long)]
    out: PathBuf,
    /// Where to write the hidden teacher's parameters.
    #[arg(long)]
    params: PathBuf,
    /// Stddev of Gaussian noise added to stored teacher scores.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    vocab: Option<usize>,
    /// Label questions with an existing teacher instead of sampling a new one.
    #[arg(long)]
    teacher_params: Option<PathBuf>,
    /// Perturb the teacher's weights by this stddev before labeling.
    #[arg(long)]
    shift: Option<f64>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output prefix; writes PREFIX.train.jsonl, PREFIX.dev.jsonl and PREFIX.test.jsonl.
    #[arg(long)]
    out: PathBuf,
    /// Train, dev and test fractions.
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.1, 0.1])]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TeacherKind {
    Lexical,
    Replay,
    Synthetic,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    teacher: TeacherKind,
    /// Corpus for the lexical teacher (JSON Lines with doc_id and text).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Documents retrieved per question.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Teacher parameters for the synthetic teacher.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    DistillRegression,
    DistillClassification,
    Correctness,
    Wellformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HeadArg {
    Regression,
    Classification,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    strategy: Strategy,
    /// Defaults to the strategy's natural head.
    #[arg(long, value_enum)]
    head: Option<HeadArg>,
    /// Answer threshold; required by distill-classification.
    #[arg(long, value_parser = unit_interval)]
    tau1: Option<f64>,
    #[arg(long, default_value_t = qfilter::filter::train::DEFAULT_LEARNING_RATE)]
    lr: f64,
    #[arg(long, default_value_t = 3)]
    epochs: u32,
    #[arg(long, default_value_t = 128)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.05)]
    warmup: f64,
    #[arg(long, default_value_t = qfilter::filter::features::DEFAULT_DIMENSION)]
    dim: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    bigrams: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Continue training this model instead of starting from zero.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Dev split with teacher scores.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = unit_interval)]
    tau1: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Test split with teacher scores and correctness labels.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = unit_interval)]
    tau1: f64,
    #[arg(long, value_parser = unit_interval, required_unless_present = "calibration")]
    tau2: Option<f64>,
    /// Take tau2 from a calibrate output file.
    #[arg(long, conflicts_with = "tau2")]
    calibration: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepMode {
    /// The answer model alone, thresholding its own score.
    Model,
    /// The filter score standing in for the answer model's score.
    Filter,
    /// Filter and answer model sharing one threshold.
    Joint,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = SweepMode::Model)]
    mode: SweepMode,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Number of evenly spaced thresholds in [0, 1].
    #[arg(long, default_value_t = qfilter::metrics::DEFAULT_GRID_POINTS)]
    grid: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CostArgs {
    #[arg(long, default_value_t = 1000)]
    n_questions: u64,
    #[arg(long, default_value_t = 400)]
    candidates: u64,
    #[arg(long, default_value_t = 100)]
    batch_size: u64,
    #[arg(long, default_value_t = 128)]
    seq_len_m: u64,
    #[arg(long, default_value_t = 32)]
    seq_len_f: u64,
    /// Fraction of questions the filter discards.
    #[arg(long, value_parser = unit_interval, default_value_t = 0.2)]
    filter_fraction: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Split(a) => commands::split(a),
        Command::Score(a) => commands::score(a),
        Command::Train(a) => commands::train(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Cost(a) => commands::cost(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
