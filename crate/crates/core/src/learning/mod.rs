//! Multi-label learners: one independent binary scorer per reason label.

mod baseline;
mod dataset;
mod forest;
mod linear;
mod model;

pub use baseline::{random_baseline, rule_mapped_baseline, RELEVANCE_CUTOFF};
pub use dataset::Dataset;
pub use forest::{
    class_weights, gini, tree_seed, ClassWeight, DecisionTree, FeaturesPerSplit, ForestConfig,
    TreeNode,
};
pub use linear::{bce_loss, LinearConfig, LogisticObjective, LogisticScorer, Standardizer};
pub use model::{
    load_model, save_model, BinaryScorer, ModelConfig, ModelKind, MultiLabelModel,
    MODEL_FORMAT_VERSION,
};

use crate::error::Result;

pub fn train_forest(dataset: &Dataset, config: &ForestConfig) -> Result<MultiLabelModel> {
    forest::train(dataset, config)
}

pub fn train_linear(dataset: &Dataset, config: &LinearConfig) -> Result<MultiLabelModel> {
    linear::train(dataset, config)
}

pub fn predict_scores(model: &MultiLabelModel, features: &[f64]) -> Result<[f64; crate::labels::NUM_LABELS]> {
    model.predict(features)
}

pub fn feature_importance(model: &MultiLabelModel) -> &[Vec<f64>] {
    &model.importances
}
