use std::path::Path;
use std::process::ExitCode;

use whydiffer::ingestion::{load_image_features, scan_records};

use crate::failure::Failure;

pub fn run(records: &Path, image_features: Option<&Path>) -> Result<ExitCode, Failure> {
    let scan = scan_records(records)?;
    for issue in &scan.issues {
        println!("{}: {issue}", records.display());
    }
    println!(
        "{} valid records, {} lines with issues",
        scan.records.len(),
        scan.issues.len()
    );
    if let Some(path) = image_features {
        let sidecar = load_image_features(path)?;
        let covered = scan
            .records
            .iter()
            .filter(|r| sidecar.contains_key(&r.image_id))
            .count();
        let total = scan.records.len();
        let fraction = if total == 0 { 0.0 } else { covered as f64 / total as f64 };
        println!("image features: {covered}/{total} records covered ({fraction:.3})");
    }
    Ok(if scan.issues.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
