//! Sigmoid linear scorers trained by full-batch gradient descent on binary
//! cross-entropy with an L2 penalty.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::model::{BinaryScorer, ModelConfig, ModelKind, MultiLabelModel};
use crate::error::{Error, Result};
use crate::labels::{ReasonLabel, NUM_LABELS};

const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Recorded for provenance; weights start at zero so training does not
    /// consume randomness.
    pub seed: u64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            learning_rate: 0.05,
            epochs: 500,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl LinearConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config("l2 must be non-negative".into()));
        }
        Ok(())
    }
}

/// Summed binary cross-entropy `-Σ y log p + (1 - y) log(1 - p)`, with
/// probabilities clamped to `[1e-12, 1 - 1e-12]`.
pub fn bce_loss(y: &[f64], p: &[f64]) -> f64 {
    y.iter()
        .zip(p)
        .map(|(&y, &p)| {
            let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum()
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Per-slot z-scoring fitted on training data. Slots with zero spread map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &Dataset) -> Self {
        let n = data.n_rows() as f64;
        let (mut mean, mut std) = (Vec::new(), Vec::new());
        for j in 0..data.n_features() {
            let col = data.column(j);
            let m = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            mean.push(m);
            std.push(var.sqrt());
        }
        Standardizer { mean, std }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

/// Mean BCE of a logistic model plus `l2 · ‖w‖² / 2` (bias unpenalized).
pub struct LogisticObjective<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [f64],
    pub l2: f64,
}

impl LogisticObjective<'_> {
    fn logit(w: &[f64], b: f64, x: &[f64]) -> f64 {
        b + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn loss(&self, w: &[f64], b: f64) -> f64 {
        let n = self.x.len() as f64;
        // softplus(z) - y·z is the cross-entropy of sigmoid(z) against y.
        let data: f64 = self
            .x
            .iter()
            .zip(self.y)
            .map(|(x, &y)| {
                let z = Self::logit(w, b, x);
                softplus(z) - y * z
            })
            .sum();
        data / n + 0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Gradient with respect to `(w, b)`.
    pub fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let n = self.x.len() as f64;
        let mut gw = vec![0.0; w.len()];
        let mut gb = 0.0;
        for (x, &y) in self.x.iter().zip(self.y) {
            let r = sigmoid(Self::logit(w, b, x)) - y;
            gb += r;
            for (g, &xi) in gw.iter_mut().zip(x) {
                *g += r * xi;
            }
        }
        for (g, &wi) in gw.iter_mut().zip(w) {
            *g = *g / n + self.l2 * wi;
        }
        (gw, gb / n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticScorer {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticScorer {
    /// `x` must already be standardized.
    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(LogisticObjective::logit(&self.weights, self.bias, x))
    }
}

fn fit_one(x: &[Vec<f64>], y: &[f64], config: &LinearConfig) -> LogisticScorer {
    let objective = LogisticObjective { x, y, l2: config.l2 };
    let d = x.first().map_or(0, Vec::len);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for _ in 0..config.epochs {
        let (gw, gb) = objective.gradient(&w, b);
        for (wi, g) in w.iter_mut().zip(gw) {
            *wi -= config.learning_rate * g;
        }
        b -= config.learning_rate * gb;
    }
    LogisticScorer { weights: w, bias: b }
}

pub(super) fn train(data: &Dataset, config: &LinearConfig) -> Result<MultiLabelModel> {
    config.validate()?;
    if data.n_rows() < 2 {
        return Err(Error::InvalidArgument(
            "linear training needs at least 2 samples".into(),
        ));
    }
    let standardizer = Standardizer::fit(data);
    let x: Vec<Vec<f64>> = (0..data.n_rows())
        .map(|i| standardizer.transform(&data.row(i)))
        .collect();
    let fitted: Vec<LogisticScorer> = ReasonLabel::ALL
        .par_iter()
        .map(|&label| {
            let y: Vec<f64> = data
                .label_column(label)
                .into_iter()
                .map(|b| if b { 1.0 } else { 0.0 })
                .collect();
            fit_one(&x, &y, config)
        })
        .collect();

    let importances = fitted
        .iter()
        .map(|s| super::forest::normalize(s.weights.iter().map(|w| w.abs()).collect()))
        .collect();
    let scorers = fitted
        .into_iter()
        .map(|model| BinaryScorer::Linear {
            standardizer: standardizer.clone(),
            model,
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(scorers.len(), NUM_LABELS);

    Ok(MultiLabelModel {
        kind: ModelKind::Linear,
        mask: data.mask(),
        feature_names: data.feature_names().to_vec(),
        threshold: None,
        config: ModelConfig::Linear(config.clone()),
        scorers,
        importances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::LabelSet;

    #[test]
    fn bce_examples() {
        assert!(bce_loss(&[1.0; 10], &[1.0; 10]) < 1e-10);
        let ln2 = std::f64::consts::LN_2;
        assert!((bce_loss(&[1.0; 10], &[0.5; 10]) - 10.0 * ln2).abs() < 1e-12);
        assert_eq!(bce_loss(&[0.0; 10], &[0.5; 10]), bce_loss(&[1.0; 10], &[0.5; 10]));
        assert!(bce_loss(&[1.0], &[0.0]).is_finite());
    }

    #[test]
    fn objective_matches_bce() {
        let x = vec![vec![0.5, -1.0], vec![2.0, 0.25], vec![-0.3, 0.0]];
        let y = vec![1.0, 0.0, 1.0];
        let obj = LogisticObjective { x: &x, y: &y, l2: 0.0 };
        let (w, b) = ([0.3, -0.7], 0.1);
        let p: Vec<f64> = x.iter().map(|xi| sigmoid(LogisticObjective::logit(&w, b, xi))).collect();
        assert!((obj.loss(&w, b) - bce_loss(&y, &p) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn epochs_zero_is_rejected() {
        let cfg = LinearConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn all_positive_label_fits_bias() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![f64::from(i), 1.0]).collect();
        let targets = vec![LabelSet::all(); 20];
        let ds = Dataset::new(&rows, targets, vec!["a".into(), "b".into()]).unwrap();
        let model = train(&ds, &LinearConfig::default()).unwrap();
        for s in model.predict(&[3.0, 1.0]).unwrap() {
            assert!(s > 0.5);
        }
        // The constant column is dropped by standardization.
        let BinaryScorer::Linear { standardizer, .. } = &model.scorers[0] else {
            panic!()
        };
        assert_eq!(standardizer.std[1], 0.0);
    }
}
