//! `whydiffer`: batch analysis and prediction of crowd answer disagreement.

mod commands;
mod data;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use whydiffer::learning::{ClassWeight, FeaturesPerSplit};
use whydiffer::{AblationMask, Threshold};

use crate::failure::Failure;

#[derive(Parser)]
#[command(name = "whydiffer", version, about = "Why do crowd answers to visual questions differ?")]
struct Cli {
    /// Seed for split generation, forest training and the random baseline
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Validity threshold k: workers (of 5) needed for a reason to count
    #[arg(long, global = true)]
    threshold: Option<i64>,

    /// Output directory
    #[arg(long, global = true, default_value = "whydiffer-out")]
    out: PathBuf,

    /// Skip invalid, malformed or duplicate records instead of failing
    #[arg(long, global = true)]
    lenient: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a records file (and optionally an image-feature sidecar)
    Validate {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        image_features: Option<PathBuf>,
    },
    /// Descriptive statistics: frequencies, sources, co-occurrence, clarity, WWS
    Stats {
        #[arg(long)]
        records: PathBuf,
    },
    /// Extract the handcrafted feature vectors to features.csv
    Features {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "QIA")]
        mask: AblationMask,
    },
    /// Train a multi-label model on the train split
    Train(TrainArgs),
    /// Score a split with a trained model and the baselines
    Evaluate(EvaluateArgs),
    /// Synthetic fixture with planted effects
    Synth {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Per-label probability that a simulated worker flips a reason
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 40)]
        workers: usize,
    },
    /// Map reasons to resolution steps
    Route(RouteArgs),
    /// Combine evaluation reports into one comparison table
    Report {
        /// report.json files written by `evaluate`
        #[arg(long, required = true, num_args = 1..)]
        reports: Vec<PathBuf>,
        /// model_id of the row deltas are measured against
        #[arg(long, default_value = "random")]
        baseline: String,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    records: PathBuf,
    /// Image-feature sidecar; missing images get zero counts
    #[arg(long)]
    image_features: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    /// Split manifest (JSONL of {"id","split"}); generated from the fractions and --seed when absent
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long, default_value_t = 0.65)]
    train_frac: f64,
    #[arg(long, default_value_t = 0.10)]
    val_frac: f64,
    #[arg(long, default_value_t = 0.25)]
    test_frac: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelChoice {
    Forest,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightChoice {
    Balanced,
    Uniform,
}

impl From<WeightChoice> for ClassWeight {
    fn from(w: WeightChoice) -> Self {
        match w {
            WeightChoice::Balanced => ClassWeight::Balanced,
            WeightChoice::Uniform => ClassWeight::Uniform,
        }
    }
}

fn parse_max_features(s: &str) -> Result<FeaturesPerSplit, String> {
    match s {
        "sqrt" => Ok(FeaturesPerSplit::Sqrt),
        "all" => Ok(FeaturesPerSplit::All),
        n => n
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .map(FeaturesPerSplit::Count)
            .ok_or_else(|| format!("expected sqrt, all or a positive count, got '{n}'")),
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long, value_enum, default_value = "forest")]
    model: ModelChoice,
    #[arg(long, default_value = "QIA")]
    mask: AblationMask,
    /// JSON model configuration ({"kind":"forest",...}); overrides the flags below
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, value_enum)]
    class_weight: Option<WeightChoice>,
    /// Candidate features per split: sqrt, all or a count
    #[arg(long, value_parser = parse_max_features)]
    max_features: Option<FeaturesPerSplit>,
    #[arg(long)]
    min_samples_split: Option<usize>,
    #[arg(long)]
    no_bootstrap: bool,

    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineChoice {
    Random,
    QiRelevance,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Which split to score
    #[arg(long, default_value = "test")]
    on: whydiffer::ingestion::Split,
    /// Row name for the model; defaults to the model file stem
    #[arg(long)]
    model_id: Option<String>,
    /// QI-relevance sidecar (JSONL of {"id","relevance"})
    #[arg(long)]
    relevance: Option<PathBuf>,
    /// Baselines to include; random is always reported
    #[arg(long, value_enum, value_delimiter = ',')]
    baseline: Vec<BaselineChoice>,
}

#[derive(Args)]
struct RouteArgs {
    /// Comma-separated reason codes, e.g. AMB,SYN; prints the route and exits
    #[arg(long, conflicts_with_all = ["records", "model"])]
    labels: Option<String>,
    /// Route every record: by predicted scores with --model, else by ground truth
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, requires = "records")]
    model: Option<PathBuf>,
    #[arg(long)]
    image_features: Option<PathBuf>,
}

struct Globals {
    seed: u64,
    threshold: Option<Threshold>,
    out: PathBuf,
    lenient: bool,
}

impl Globals {
    fn threshold_or_default(&self) -> Threshold {
        self.threshold.unwrap_or_default()
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let globals = Globals {
        seed: cli.seed,
        threshold: cli.threshold.map(Threshold::new).transpose()?,
        out: cli.out,
        lenient: cli.lenient,
    };
    match cli.command {
        Command::Validate {
            records,
            image_features,
        } => commands::validate::run(&records, image_features.as_deref()),
        Command::Stats { records } => commands::stats::run(&globals, &records),
        Command::Features { data, mask } => commands::features::run(&globals, &data, mask),
        Command::Train(args) => commands::train::run(&globals, &args),
        Command::Evaluate(args) => commands::evaluate::run(&globals, &args),
        Command::Synth { n, noise, workers } => commands::synth::run(&globals, n, noise, workers),
        Command::Route(args) => commands::route::run(&globals, &args),
        Command::Report { reports, baseline } => commands::report::run(&globals, &reports, &baseline),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(failure)) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal invariant violated");
            ExitCode::from(3)
        }
    }
}
