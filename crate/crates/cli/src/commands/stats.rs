//! Every value written here comes straight from a library call; formatting is
//! the only transformation.

use std::path::Path;
use std::process::ExitCode;

use whydiffer::aggregation::{label_frequency, source_type_distribution, unique_reason_histogram, SourceType};
use whydiffer::ingestion::load_records;
use whydiffer::statistics::{clarity, co_occurrence_matrix, worker_summary};
use whydiffer::{ground_truth, ReasonLabel, Threshold};

use crate::failure::Failure;
use crate::output::{csv_writer, ensure_dir, label_codes, num, opt};
use crate::Globals;

fn with_k(rest: Vec<&'static str>) -> Vec<&'static str> {
    std::iter::once("k").chain(rest).collect()
}

pub fn run(globals: &Globals, records: &Path) -> Result<ExitCode, Failure> {
    let records = load_records(records, globals.lenient)?.records;
    if records.is_empty() {
        return Err(whydiffer::Error::Empty("record list").into());
    }
    let thresholds: Vec<Threshold> = match globals.threshold {
        Some(k) => vec![k],
        None => Threshold::all().collect(),
    };
    let out = &globals.out;
    ensure_dir(out)?;

    let (mut freq, _) = csv_writer(out, "label_frequency.csv")?;
    let (mut source, _) = csv_writer(out, "source_type.csv")?;
    let (mut unique, _) = csv_writer(out, "unique_reasons.csv")?;
    let (mut co, _) = csv_writer(out, "co_occurrence.csv")?;
    let (mut clar, _) = csv_writer(out, "clarity.csv")?;

    freq.write_record(with_k(label_codes().collect()))?;
    source.write_record(with_k(SourceType::ALL.iter().map(|t| t.name()).collect()))?;
    unique.write_record(with_k(vec!["reasons", "records"]))?;
    co.write_record(with_k(std::iter::once("reason").chain(label_codes()).collect()))?;
    clar.write_record(with_k(label_codes().collect()))?;

    for k in thresholds {
        let g = ground_truth(&records, k);
        let kk = k.get().to_string();

        let f = label_frequency(&g)?;
        freq.write_record(std::iter::once(kk.clone()).chain(f.iter().map(|&v| num(v))))?;

        let s = source_type_distribution(&g)?;
        source.write_record(
            std::iter::once(kk.clone()).chain(SourceType::ALL.iter().map(|&t| num(s.get(t)))),
        )?;

        for (count, n) in unique_reason_histogram(&g).iter().enumerate() {
            unique.write_record([kk.clone(), count.to_string(), n.to_string()])?;
        }

        let m = co_occurrence_matrix(&g)?;
        for d_i in ReasonLabel::ALL {
            co.write_record(
                [kk.clone(), d_i.code().to_string()]
                    .into_iter()
                    .chain(m.values[d_i.index()].iter().map(|&v| opt(v))),
            )?;
        }

        clar.write_record(
            std::iter::once(kk).chain(ReasonLabel::ALL.iter().map(|&d| opt(clarity(d, &g)))),
        )?;
    }
    for w in [&mut freq, &mut source, &mut unique, &mut co, &mut clar] {
        w.flush().map_err(|e| Failure::setup(e.to_string()))?;
    }

    let (mut wws, _) = csv_writer(out, "worker_wws.csv")?;
    wws.write_record([
        "worker_id",
        "mean_wws_common",
        "mean_wws_cosine",
        "mean_wws_kappa",
        "pair_count",
    ])?;
    for s in worker_summary(&records) {
        wws.write_record([
            s.worker_id,
            opt(s.mean_wws_common),
            opt(s.mean_wws_cosine),
            opt(s.mean_wws_kappa),
            s.pair_count.to_string(),
        ])?;
    }
    wws.flush().map_err(|e| Failure::setup(e.to_string()))?;

    println!("wrote statistics for {} records to {}", records.len(), out.display());
    Ok(ExitCode::SUCCESS)
}
