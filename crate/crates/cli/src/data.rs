//! Input loading shared by the commands.

use std::path::PathBuf;

use serde::Serialize;
use whydiffer::features::apply_mask;
use whydiffer::ingestion::{
    generate_split, image_features_for, load_image_features, load_records, load_split_manifest,
    ImageFeatures, Split, SplitAssignment, SplitProportions,
};
use whydiffer::{extract_features, AblationMask, FeatureVector, VisualQuestionRecord};

use crate::failure::Failure;
use crate::{DataArgs, SplitArgs};

pub struct Inputs {
    pub records: Vec<VisualQuestionRecord>,
    pub features: Vec<FeatureVector>,
    /// Records dropped in lenient mode.
    pub skipped: usize,
    /// Records whose image had no sidecar entry.
    pub imputed: usize,
}

pub fn load_inputs(data: &DataArgs, lenient: bool) -> Result<Inputs, Failure> {
    let loaded = load_records(&data.records, lenient)?;
    if loaded.skipped > 0 {
        eprintln!("skipped {} unusable lines of {}", loaded.skipped, data.records.display());
    }
    let sidecar = match &data.image_features {
        Some(path) => load_image_features(path)?,
        None => Default::default(),
    };
    let (images, imputed): (Vec<ImageFeatures>, usize) = image_features_for(&loaded.records, &sidecar);
    if imputed > 0 {
        eprintln!("{imputed} records have no image features; using zeros");
    }
    let features = loaded
        .records
        .iter()
        .zip(&images)
        .map(|(r, i)| extract_features(r, i))
        .collect();
    Ok(Inputs {
        records: loaded.records,
        features,
        skipped: loaded.skipped,
        imputed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitSummary {
    /// Manifest path, or "generated".
    pub source: String,
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

pub fn resolve_split(
    args: &SplitArgs,
    records: &[VisualQuestionRecord],
    seed: u64,
) -> Result<(SplitAssignment, SplitSummary), Failure> {
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let (assignment, source) = match &args.split {
        Some(path) => (load_split_manifest(path, &ids)?, path.display().to_string()),
        None => {
            let proportions = SplitProportions {
                train: args.train_frac,
                val: args.val_frac,
                test: args.test_frac,
            };
            (generate_split(&ids, proportions, seed)?, "generated".to_string())
        }
    };
    let summary = SplitSummary {
        source,
        train: assignment.count(Split::Train),
        val: assignment.count(Split::Validation),
        test: assignment.count(Split::Test),
    };
    Ok((assignment, summary))
}

/// Positions of the records in `split`, in file order.
pub fn split_rows(records: &[VisualQuestionRecord], assignment: &SplitAssignment, split: Split) -> Vec<usize> {
    (0..records.len())
        .filter(|&i| assignment.get(&records[i].id) == Some(split))
        .collect()
}

pub fn masked_rows(features: &[FeatureVector], rows: &[usize], mask: AblationMask) -> Vec<Vec<f64>> {
    rows.iter().map(|&i| apply_mask(&features[i], mask)).collect()
}

pub fn file_stem(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| PathBuf::from(path).display().to_string())
}
