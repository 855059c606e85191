use std::process::ExitCode;

use serde::{Deserialize, Serialize};
use whydiffer::evaluation::{compare, evaluate, pr_curve, ComparisonTable, EvaluationReport, ReportMeta};
use whydiffer::ingestion::load_relevance;
use whydiffer::learning::{load_model, random_baseline, rule_mapped_baseline};
use whydiffer::{aggregate_ground_truth, AblationMask, LabelSet, ReasonLabel, NUM_LABELS};

use crate::data::{file_stem, load_inputs, masked_rows, resolve_split, split_rows};
use crate::failure::Failure;
use crate::output::{csv_writer, ensure_dir, label_codes, num, opt, write_json};
use crate::{BaselineChoice, EvaluateArgs, Globals};

pub const RANDOM_ID: &str = "random";
pub const QI_RELEVANCE_ID: &str = "qi-relevance";

/// Contents of `report.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub reports: Vec<EvaluationReport>,
    pub comparison: ComparisonTable,
}

pub fn run(globals: &Globals, args: &EvaluateArgs) -> Result<ExitCode, Failure> {
    let wants_relevance = args.baseline.contains(&BaselineChoice::QiRelevance);
    if wants_relevance && args.relevance.is_none() {
        return Err(Failure::setup("--baseline qi-relevance needs a --relevance sidecar"));
    }
    let model = load_model(&args.model)?;
    let mask = match model.mask {
        Some(m) => m,
        None if model.n_features() == AblationMask::QIA.len() => AblationMask::QIA,
        None => {
            return Err(Failure::setup(format!(
                "model expects {} features but records no feature mask",
                model.n_features()
            )))
        }
    };
    let k = globals.threshold.or(model.threshold).unwrap_or_default();

    let inputs = load_inputs(&args.data, globals.lenient)?;
    let (assignment, _) = resolve_split(&args.split, &inputs.records, globals.seed)?;
    let rows = split_rows(&inputs.records, &assignment, args.on);
    if rows.is_empty() {
        return Err(whydiffer::Error::Empty("evaluation split").into());
    }
    let x = masked_rows(&inputs.features, &rows, mask);
    let truth: Vec<LabelSet> = rows
        .iter()
        .map(|&i| aggregate_ground_truth(&inputs.records[i].annotations, k).labels)
        .collect();
    let ids: Vec<String> = rows.iter().map(|&i| inputs.records[i].id.clone()).collect();

    let model_id = args.model_id.clone().unwrap_or_else(|| file_stem(&args.model));
    let model_scores = x
        .iter()
        .map(|row| model.predict(row))
        .collect::<Result<Vec<_>, _>>()?;
    let mut scored: Vec<(String, Option<String>, Vec<[f64; NUM_LABELS]>)> = vec![
        (model_id, Some(mask.to_string()), model_scores),
        (RANDOM_ID.into(), None, random_baseline(rows.len(), globals.seed)),
    ];
    if let Some(path) = &args.relevance {
        let relevance = load_relevance(path)?;
        scored.push((
            QI_RELEVANCE_ID.into(),
            None,
            rule_mapped_baseline(&ids, &relevance, globals.seed)?,
        ));
    }

    let reports = scored
        .iter()
        .map(|(id, mask, scores)| {
            evaluate(
                scores,
                &truth,
                ReportMeta {
                    model_id: id.clone(),
                    mask: mask.clone(),
                    split: args.on.name().to_string(),
                    threshold: k,
                },
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let comparison = compare(&reports, 1)?;

    let out = &globals.out;
    ensure_dir(out)?;
    write_json(out, "report.json", &ReportFile {
        reports: reports.clone(),
        comparison,
    })?;

    let (mut table, path) = csv_writer(out, "report.csv")?;
    let header = ["model_id", "mask", "split", "threshold", "n", "mean_ap"];
    table.write_record(header.into_iter().chain(label_codes()))?;
    for r in &reports {
        table.write_record(
            [
                r.model_id.clone(),
                r.mask.clone().unwrap_or_default(),
                r.split.clone(),
                r.threshold.get().to_string(),
                r.n_test.to_string(),
                opt(r.mean_ap),
            ]
            .into_iter()
            .chain(r.per_label_ap.iter().map(|&v| opt(v))),
        )?;
    }
    table.flush().map_err(|e| Failure::io(&path, e))?;

    let (mut curves, path) = csv_writer(out, "pr_curves.csv")?;
    curves.write_record(["model_id", "label", "threshold", "precision", "recall"])?;
    for (id, _, scores) in &scored {
        for label in ReasonLabel::ALL {
            let y: Vec<bool> = truth.iter().map(|t| t.contains(label)).collect();
            if !y.contains(&true) {
                continue;
            }
            let s: Vec<f64> = scores.iter().map(|r| r[label.index()]).collect();
            for p in pr_curve(&s, &y)?.points {
                curves.write_record([
                    id.clone(),
                    label.code().to_string(),
                    num(p.threshold),
                    num(p.precision),
                    num(p.recall),
                ])?;
            }
        }
    }
    curves.flush().map_err(|e| Failure::io(&path, e))?;

    for r in &reports {
        println!("{:<16} mean AP {}", r.model_id, opt(r.mean_ap));
    }
    Ok(ExitCode::SUCCESS)
}
