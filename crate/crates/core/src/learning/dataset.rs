use crate::aggregation::GroundTruthVector;
use crate::error::{Error, Result};
use crate::features::{apply_mask, AblationMask, FeatureVector};
use crate::labels::{LabelSet, ReasonLabel};

/// A rectangular feature matrix with multi-label targets.
///
/// Values are stored column-major since tree growing scans one feature at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    n_rows: usize,
    targets: Vec<LabelSet>,
    feature_names: Vec<String>,
    mask: Option<AblationMask>,
}

impl Dataset {
    /// Builds a dataset from row vectors. Rows must all have
    /// `feature_names.len()` values.
    pub fn new(rows: &[Vec<f64>], targets: Vec<LabelSet>, feature_names: Vec<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("training set"));
        }
        if rows.len() != targets.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} target rows",
                rows.len(),
                targets.len()
            )));
        }
        let width = feature_names.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::InvalidArgument(format!(
                "feature matrix is not rectangular: row {i} has {} values, expected {width}",
                r.len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("feature values must be finite".into()));
        }
        let columns = (0..width)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        Ok(Dataset {
            columns,
            n_rows: rows.len(),
            targets,
            feature_names,
            mask: None,
        })
    }

    /// Masked handcrafted features paired with ground truth.
    pub fn from_features(
        features: &[FeatureVector],
        ground_truth: &[GroundTruthVector],
        mask: AblationMask,
    ) -> Result<Self> {
        let rows: Vec<Vec<f64>> = features.iter().map(|f| apply_mask(f, mask)).collect();
        let targets = ground_truth.iter().map(|g| g.labels).collect();
        let mut ds = Dataset::new(&rows, targets, mask.feature_names())?;
        ds.mask = Some(mask);
        Ok(ds)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn targets(&self) -> &[LabelSet] {
        &self.targets
    }

    /// Binary target column for one label.
    pub fn label_column(&self, label: ReasonLabel) -> Vec<bool> {
        self.targets.iter().map(|t| t.contains(label)).collect()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn mask(&self) -> Option<AblationMask> {
        self.mask
    }
}
