//! The trained multi-label model and its versioned JSON file format.
//!
//! A model file is a JSON object
//!
//! ```json
//! { "format_version": 1, "checksum": "<sha256 hex>", "model": { ... } }
//! ```
//!
//! where the checksum covers the compact serialization of `model` with keys
//! in sorted order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::forest::{DecisionTree, ForestConfig};
use super::linear::{LinearConfig, LogisticScorer, Standardizer};
use crate::aggregation::Threshold;
use crate::error::{Error, Result};
use crate::features::AblationMask;
use crate::labels::NUM_LABELS;

pub const MODEL_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Forest,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Forest(ForestConfig),
    Linear(LinearConfig),
}

/// Scorer for one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BinaryScorer {
    /// Used when the training labels were all one class.
    Constant { score: f64 },
    /// Mean of the trees' leaf scores.
    Forest { trees: Vec<DecisionTree> },
    Linear {
        standardizer: Standardizer,
        model: LogisticScorer,
    },
}

impl BinaryScorer {
    fn score(&self, x: &[f64]) -> f64 {
        match self {
            BinaryScorer::Constant { score } => *score,
            BinaryScorer::Forest { trees } => {
                trees.iter().map(|t| t.predict(x)).sum::<f64>() / trees.len() as f64
            }
            BinaryScorer::Linear {
                standardizer,
                model,
            } => model.score(&standardizer.transform(x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelModel {
    pub kind: ModelKind,
    /// Feature subset the model was trained on; `None` for custom layouts.
    pub mask: Option<AblationMask>,
    pub feature_names: Vec<String>,
    /// Validity threshold of the training ground truth, when known.
    pub threshold: Option<Threshold>,
    pub config: ModelConfig,
    /// One scorer per label, canonical order.
    pub scorers: Vec<BinaryScorer>,
    /// Per-label feature importances, each summing to 1 or all zero.
    pub importances: Vec<Vec<f64>>,
}

impl MultiLabelModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Scores in canonical label order for one (masked) feature vector.
    pub fn predict(&self, x: &[f64]) -> Result<[f64; NUM_LABELS]> {
        if x.len() != self.n_features() {
            return Err(Error::LengthMismatch {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        Ok(std::array::from_fn(|l| self.scorers[l].score(x)))
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.scorers.len() != NUM_LABELS {
            return Err(format!("expected {NUM_LABELS} scorers, found {}", self.scorers.len()));
        }
        if self.importances.len() != NUM_LABELS
            || self.importances.iter().any(|v| v.len() != self.n_features())
        {
            return Err("importance vectors do not match the feature layout".into());
        }
        if let Some(mask) = self.mask {
            if mask.len() != self.n_features() {
                return Err(format!("mask {mask} does not match {} features", self.n_features()));
            }
        }
        let d = self.n_features();
        for scorer in &self.scorers {
            match scorer {
                BinaryScorer::Constant { score } if !(0.0..=1.0).contains(score) => {
                    return Err(format!("constant score {score} outside [0, 1]"));
                }
                BinaryScorer::Forest { trees } => {
                    if trees.is_empty() {
                        return Err("forest without trees".into());
                    }
                    for t in trees {
                        t.check_structure(d)?;
                    }
                }
                BinaryScorer::Linear {
                    standardizer,
                    model,
                } => {
                    if standardizer.mean.len() != d
                        || standardizer.std.len() != d
                        || model.weights.len() != d
                    {
                        return Err("linear scorer does not match the feature layout".into());
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn checksum(payload: &Value) -> String {
    let canonical = serde_json::to_string(payload).expect("Value serialization");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn save_model(model: &MultiLabelModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let payload = serde_json::to_value(model).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let envelope = serde_json::json!({
        "format_version": MODEL_FORMAT_VERSION,
        "checksum": checksum(&payload),
        "model": payload,
    });
    let mut text = serde_json::to_string_pretty(&envelope).expect("Value serialization");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MultiLabelModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut envelope: Value =
        serde_json::from_str(&text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let version = envelope
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::ModelFormat("missing format_version".into()))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    let expected = envelope
        .get("checksum")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::ModelFormat("missing checksum".into()))?
        .to_string();
    let payload = envelope
        .get_mut("model")
        .map(Value::take)
        .ok_or_else(|| Error::ModelFormat("missing model".into()))?;
    let actual = checksum(&payload);
    if actual != expected {
        return Err(Error::ChecksumMismatch { expected, actual });
    }
    let model: MultiLabelModel =
        serde_json::from_value(payload).map_err(|e| Error::ModelFormat(e.to_string()))?;
    model.check().map_err(Error::ModelFormat)?;
    Ok(model)
}
