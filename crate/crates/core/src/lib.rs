//! Analysis and prediction of why crowd answers to visual questions differ.
//!
//! The crate covers the whole desk-scale pipeline:
//!
//! * [`labels`] and [`record`]: the ten reason codes, records and validation;
//! * [`ingestion`]: JSONL loaders, sidecars, split manifests, seeded splits;
//! * [`aggregation`]: thresholded ground truth and descriptive tallies;
//! * [`statistics`]: co-occurrence, clarity and worker–worker similarity;
//! * [`features`]: the 20-slot handcrafted feature vector and ablation masks;
//! * [`learning`]: per-label random forests, a sigmoid linear model, baselines;
//! * [`evaluation`]: average precision, PR curves and comparison tables;
//! * [`routing`]: reason → resolution-step lookup;
//! * [`synth`]: synthetic fixtures with planted effects.

pub mod aggregation;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod ingestion;
pub mod labels;
pub mod learning;
pub mod record;
pub mod routing;
pub mod statistics;
pub mod synth;

pub use aggregation::{aggregate_ground_truth, GroundTruthVector, SourceType, Threshold};
pub use error::{Error, Result};
pub use features::{extract_features, AblationMask, FeatureVector, FEATURE_NAMES};
pub use labels::{LabelSet, ReasonLabel, Side, TaskVector, NUM_LABELS};
pub use learning::{Dataset, ForestConfig, LinearConfig, MultiLabelModel};
pub use record::{task_vector, validate_record, RawRecord, VisualQuestionRecord, WorkerAnnotation};

/// Ground truth for every record at threshold `k`.
pub fn ground_truth(records: &[VisualQuestionRecord], k: Threshold) -> Vec<GroundTruthVector> {
    records
        .iter()
        .map(|r| aggregate_ground_truth(&r.annotations, k))
        .collect()
}
