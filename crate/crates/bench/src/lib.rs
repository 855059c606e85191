//! Inputs shared by the benchmarks, built from the synthetic fixture generator.

use whydiffer::ingestion::image_features_for;
use whydiffer::learning::Dataset;
use whydiffer::synth::{generate, SynthSpec};
use whydiffer::{extract_features, ground_truth, AblationMask, GroundTruthVector, Threshold, VisualQuestionRecord};

pub fn records(n: usize, seed: u64) -> Vec<VisualQuestionRecord> {
    generate(&SynthSpec { n, seed, ..Default::default() })
        .expect("n >= 20")
        .records
}

pub fn ground_truth_vectors(n: usize, seed: u64) -> Vec<GroundTruthVector> {
    ground_truth(&records(n, seed), Threshold::default())
}

pub fn dataset(n: usize, seed: u64, mask: AblationMask) -> Dataset {
    let fx = generate(&SynthSpec { n, seed, ..Default::default() }).expect("n >= 20");
    let (images, _) = image_features_for(&fx.records, &fx.image_features);
    let features: Vec<_> = fx
        .records
        .iter()
        .zip(&images)
        .map(|(r, i)| extract_features(r, i))
        .collect();
    let truth = ground_truth(&fx.records, Threshold::default());
    Dataset::from_features(&features, &truth, mask).expect("non-empty")
}
