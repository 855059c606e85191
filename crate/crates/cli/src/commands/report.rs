use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use whydiffer::evaluation::{compare, EvaluationReport};
use whydiffer::ReasonLabel;

use super::evaluate::ReportFile;
use crate::failure::Failure;
use crate::output::{csv_writer, ensure_dir, opt, write_json};
use crate::Globals;

pub fn run(globals: &Globals, files: &[PathBuf], baseline: &str) -> Result<ExitCode, Failure> {
    let mut reports: Vec<EvaluationReport> = Vec::new();
    for path in files {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let file: ReportFile = serde_json::from_str(&text)
            .map_err(|e| Failure::setup(format!("{}: {e}", path.display())))?;
        for r in file.reports {
            match reports
                .iter()
                .find(|seen| seen.model_id == r.model_id && seen.mask == r.mask)
            {
                // The same baseline appears in every report file.
                Some(seen) if *seen == r => {}
                Some(_) => {
                    return Err(Failure::setup(format!(
                        "conflicting results for {} ({})",
                        r.model_id,
                        r.mask.as_deref().unwrap_or("no mask")
                    )))
                }
                None => reports.push(r),
            }
        }
    }
    let base = reports
        .iter()
        .position(|r| r.model_id == baseline)
        .ok_or_else(|| Failure::setup(format!("no report row named '{baseline}'")))?;
    let table = compare(&reports, base)?;

    let out = &globals.out;
    ensure_dir(out)?;
    write_json(out, "comparison.json", &table)?;
    let (mut w, path) = csv_writer(out, "comparison.csv")?;
    w.write_record(["model_id", "mask", "metric", "ap", "delta", "below_baseline"])?;
    for row in &table.rows {
        let metrics = std::iter::once(("mean", &row.overall))
            .chain(ReasonLabel::ALL.iter().map(|l| (l.code(), &row.labels[l.index()])));
        for (metric, cell) in metrics {
            w.write_record([
                row.model_id.clone(),
                row.mask.clone().unwrap_or_default(),
                metric.to_string(),
                opt(cell.value),
                opt(cell.delta),
                cell.below_baseline.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Failure::io(&path, e))?;

    for row in &table.rows {
        let mask = row.mask.as_deref().unwrap_or("-");
        println!(
            "{:<16} {:<4} mean AP {:<22} delta {}",
            row.model_id,
            mask,
            opt(row.overall.value),
            opt(row.overall.delta)
        );
    }
    Ok(ExitCode::SUCCESS)
}
