use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use serde::Serialize;
use whydiffer::ingestion::Split;
use whydiffer::learning::{save_model, train_forest, train_linear, Dataset, ModelConfig};
use whydiffer::{ForestConfig, LinearConfig, ReasonLabel, Threshold};

use crate::data::{load_inputs, resolve_split, split_rows, SplitSummary};
use crate::failure::Failure;
use crate::output::{ensure_dir, write_json};
use crate::{Globals, ModelChoice, TrainArgs};

#[derive(Serialize)]
struct PositiveCount {
    label: ReasonLabel,
    positives: usize,
}

#[derive(Serialize)]
struct Durations {
    load_ms: f64,
    train_ms: f64,
    total_ms: f64,
}

#[derive(Serialize)]
struct TrainLog {
    records: String,
    image_features: Option<String>,
    mask: String,
    threshold: Threshold,
    seed: u64,
    config: ModelConfig,
    split: SplitSummary,
    skipped_records: usize,
    imputed_image_features: usize,
    n_train: usize,
    positive_counts: Vec<PositiveCount>,
    durations: Durations,
}

fn model_config(args: &TrainArgs, seed: u64) -> Result<ModelConfig, Failure> {
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        return serde_json::from_str(&text)
            .map_err(|e| Failure::setup(format!("{}: {e}", path.display())));
    }
    Ok(match args.model {
        ModelChoice::Forest => {
            let d = ForestConfig::default();
            ModelConfig::Forest(ForestConfig {
                n_trees: args.n_trees.unwrap_or(d.n_trees),
                max_depth: args.max_depth.unwrap_or(d.max_depth),
                class_weight: args.class_weight.map_or(d.class_weight, Into::into),
                features_per_split: args.max_features.unwrap_or(d.features_per_split),
                min_samples_split: args.min_samples_split.unwrap_or(d.min_samples_split),
                bootstrap: !args.no_bootstrap,
                seed,
            })
        }
        ModelChoice::Linear => {
            let d = LinearConfig::default();
            ModelConfig::Linear(LinearConfig {
                learning_rate: args.learning_rate.unwrap_or(d.learning_rate),
                epochs: args.epochs.unwrap_or(d.epochs),
                l2: args.l2.unwrap_or(d.l2),
                seed,
            })
        }
    })
}

pub fn run(globals: &Globals, args: &TrainArgs) -> Result<ExitCode, Failure> {
    let start = Instant::now();
    let config = model_config(args, globals.seed)?;
    let k = globals.threshold_or_default();
    let inputs = load_inputs(&args.data, globals.lenient)?;
    let (assignment, summary) = resolve_split(&args.split, &inputs.records, globals.seed)?;
    let rows = split_rows(&inputs.records, &assignment, Split::Train);
    if rows.is_empty() {
        return Err(whydiffer::Error::Empty("train split").into());
    }
    let features: Vec<_> = rows.iter().map(|&i| inputs.features[i]).collect();
    let truth: Vec<_> = rows
        .iter()
        .map(|&i| whydiffer::aggregate_ground_truth(&inputs.records[i].annotations, k))
        .collect();
    let dataset = Dataset::from_features(&features, &truth, args.mask)?;
    let load_ms = start.elapsed().as_secs_f64() * 1e3;

    let train_start = Instant::now();
    let mut model = match &config {
        ModelConfig::Forest(c) => train_forest(&dataset, c)?,
        ModelConfig::Linear(c) => train_linear(&dataset, c)?,
    };
    model.threshold = Some(k);
    let train_ms = train_start.elapsed().as_secs_f64() * 1e3;

    let out = &globals.out;
    ensure_dir(out)?;
    let model_path = out.join("model.json");
    save_model(&model, &model_path)?;
    if args.split.split.is_none() {
        assignment.write_manifest(out.join("split.jsonl"))?;
    }

    let positive_counts = ReasonLabel::ALL
        .into_iter()
        .map(|label| PositiveCount {
            label,
            positives: dataset.label_column(label).iter().filter(|&&y| y).count(),
        })
        .collect();
    let log = TrainLog {
        records: args.data.records.display().to_string(),
        image_features: args.data.image_features.as_ref().map(|p| p.display().to_string()),
        mask: args.mask.to_string(),
        threshold: k,
        seed: globals.seed,
        config,
        split: summary,
        skipped_records: inputs.skipped,
        imputed_image_features: inputs.imputed,
        n_train: rows.len(),
        positive_counts,
        durations: Durations {
            load_ms,
            train_ms,
            total_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    };
    write_json(out, "train_log.json", &log)?;
    println!(
        "trained on {} records ({} features); model written to {}",
        rows.len(),
        dataset.n_features(),
        model_path.display()
    );
    Ok(ExitCode::SUCCESS)
}
