//! Average precision, precision-recall curves and model comparison reports.
//!
//! AP is the step-interpolated form: rank by descending score (ties keep
//! input order) and average the precision at each positive's rank.

use serde::{Deserialize, Serialize};

use crate::aggregation::Threshold;
use crate::error::{Error, Result};
use crate::labels::{LabelSet, ReasonLabel, NUM_LABELS};

/// Indices sorted by descending score; equal scores keep input order.
fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Step average precision; `None` when there are no positives.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<Option<f64>> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&y| y).count();
    if n_pos == 0 {
        return Ok(None);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, i) in ranking(scores).into_iter().enumerate() {
        if labels[i] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(Some(sum / n_pos as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

/// One point per distinct score threshold, highest threshold first.
/// Thresholds that admit no positive yet are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

impl PrCurve {
    /// `Σ (R_k − R_{k−1}) · P_k` over the points.
    pub fn step_area(&self) -> f64 {
        let mut prev = 0.0;
        let mut area = 0.0;
        for p in &self.points {
            area += (p.recall - prev) * p.precision;
            prev = p.recall;
        }
        area
    }
}

pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<PrCurve> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&y| y).count();
    if n_pos == 0 {
        return Err(Error::InvalidArgument(
            "precision-recall curve needs at least one positive".into(),
        ));
    }
    let order = ranking(scores);
    let mut points = Vec::new();
    let mut tp = 0usize;
    for (k, &i) in order.iter().enumerate() {
        if labels[i] {
            tp += 1;
        }
        let last_of_group = order
            .get(k + 1)
            .map_or(true, |&next| scores[next] != scores[i]);
        if last_of_group && tp > 0 {
            points.push(PrPoint {
                threshold: scores[i],
                recall: tp as f64 / n_pos as f64,
                precision: tp as f64 / (k + 1) as f64,
            });
        }
    }
    Ok(PrCurve { points })
}

/// Identifies what an evaluation report was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub model_id: String,
    pub mask: Option<String>,
    pub split: String,
    pub threshold: Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model_id: String,
    pub mask: Option<String>,
    pub split: String,
    pub threshold: Threshold,
    pub n_test: usize,
    /// Canonical label order; `None` where the test set has no positives.
    pub per_label_ap: [Option<f64>; NUM_LABELS],
    /// Mean over the defined per-label values.
    pub mean_ap: Option<f64>,
}

impl EvaluationReport {
    pub fn ap(&self, label: ReasonLabel) -> Option<f64> {
        self.per_label_ap[label.index()]
    }
}

pub fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

pub fn evaluate(
    scores: &[[f64; NUM_LABELS]],
    ground_truth: &[LabelSet],
    meta: ReportMeta,
) -> Result<EvaluationReport> {
    if scores.is_empty() {
        return Err(Error::Empty("test set"));
    }
    if scores.len() != ground_truth.len() {
        return Err(Error::LengthMismatch {
            expected: ground_truth.len(),
            got: scores.len(),
        });
    }
    let mut per_label_ap = [None; NUM_LABELS];
    for label in ReasonLabel::ALL {
        let l = label.index();
        let s: Vec<f64> = scores.iter().map(|row| row[l]).collect();
        let y: Vec<bool> = ground_truth.iter().map(|g| g.contains(label)).collect();
        per_label_ap[l] = average_precision(&s, &y)?;
    }
    Ok(EvaluationReport {
        model_id: meta.model_id,
        mask: meta.mask,
        split: meta.split,
        threshold: meta.threshold,
        n_test: scores.len(),
        mean_ap: mean_defined(&per_label_ap),
        per_label_ap,
    })
}

/// One value in a comparison table with its difference from the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub value: Option<f64>,
    pub delta: Option<f64>,
    /// Strictly worse than the baseline.
    pub below_baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_id: String,
    pub mask: Option<String>,
    pub overall: ComparisonCell,
    pub labels: [ComparisonCell; NUM_LABELS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub baseline: String,
    pub split: String,
    pub threshold: Threshold,
    pub rows: Vec<ComparisonRow>,
}

fn cell(value: Option<f64>, baseline: Option<f64>) -> ComparisonCell {
    let delta = value.zip(baseline).map(|(v, b)| v - b);
    ComparisonCell {
        value,
        delta,
        below_baseline: delta.is_some_and(|d| d < 0.0),
    }
}

/// Tabulates reports against `reports[baseline]`.
pub fn compare(reports: &[EvaluationReport], baseline: usize) -> Result<ComparisonTable> {
    let base = reports
        .get(baseline)
        .ok_or_else(|| Error::InvalidArgument(format!("no report at index {baseline}")))?;
    for r in reports {
        if r.split != base.split || r.threshold != base.threshold {
            return Err(Error::Incomparable(format!(
                "'{}' is on split {} at k={}, '{}' on split {} at k={}",
                r.model_id, r.split, r.threshold, base.model_id, base.split, base.threshold
            )));
        }
    }
    let rows = reports
        .iter()
        .map(|r| ComparisonRow {
            model_id: r.model_id.clone(),
            mask: r.mask.clone(),
            overall: cell(r.mean_ap, base.mean_ap),
            labels: std::array::from_fn(|l| cell(r.per_label_ap[l], base.per_label_ap[l])),
        })
        .collect();
    Ok(ComparisonTable {
        baseline: base.model_id.clone(),
        split: base.split.clone(),
        threshold: base.threshold,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(id: &str) -> ReportMeta {
        ReportMeta {
            model_id: id.into(),
            mask: None,
            split: "test".into(),
            threshold: Threshold::default(),
        }
    }

    #[test]
    fn ap_examples() {
        let s = [0.9, 0.8, 0.7];
        assert_eq!(average_precision(&s, &[true, true, false]).unwrap(), Some(1.0));
        let ap = average_precision(&s, &[false, true, true]).unwrap().unwrap();
        assert!((ap - 7.0 / 12.0).abs() < 1e-15);
        assert_eq!(average_precision(&s, &[false; 3]).unwrap(), None);
        assert!(average_precision(&s, &[true]).is_err());
    }

    #[test]
    fn ties_keep_input_order() {
        // Equal scores: the earlier index ranks first.
        assert_eq!(average_precision(&[0.5, 0.5], &[true, false]).unwrap(), Some(1.0));
        assert_eq!(average_precision(&[0.5, 0.5], &[false, true]).unwrap(), Some(0.5));
    }

    #[test]
    fn curve_examples() {
        let c = pr_curve(&[0.9, 0.8, 0.1], &[true, true, false]).unwrap();
        assert!(c.points.iter().filter(|p| p.recall < 1.0).all(|p| p.precision == 1.0));
        assert_eq!(c.points[1].recall, 1.0);
        assert_eq!(c.points[1].precision, 1.0);

        let c = pr_curve(&[0.9, 0.8, 0.7, 0.1], &[false, false, false, true]).unwrap();
        let last = c.points.last().unwrap();
        assert_eq!((last.recall, last.precision), (1.0, 0.25));

        let c = pr_curve(&[0.3; 5], &[true, false, false, true, false]).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!((c.points[0].recall, c.points[0].precision), (1.0, 0.4));

        assert!(pr_curve(&[0.1], &[false]).is_err());
    }

    #[test]
    fn curve_area_matches_ap_without_ties() {
        let s = [0.9, 0.2, 0.75, 0.4, 0.33, 0.6];
        let y = [true, false, false, true, true, false];
        let ap = average_precision(&s, &y).unwrap().unwrap();
        let area = pr_curve(&s, &y).unwrap().step_area();
        assert!((ap - area).abs() < 1e-12);
    }

    #[test]
    fn evaluate_oracle_and_missing_label() {
        let gt: Vec<LabelSet> = vec![
            [ReasonLabel::Amb].into_iter().collect(),
            [ReasonLabel::Syn, ReasonLabel::Amb].into_iter().collect(),
            LabelSet::empty(),
        ];
        let scores: Vec<[f64; 10]> = gt.iter().map(|g| g.to_bits_array().map(f64::from)).collect();
        let r = evaluate(&scores, &gt, meta("oracle")).unwrap();
        assert_eq!(r.ap(ReasonLabel::Amb), Some(1.0));
        assert_eq!(r.ap(ReasonLabel::Syn), Some(1.0));
        assert_eq!(r.ap(ReasonLabel::Lqi), None);
        assert_eq!(r.mean_ap, Some(1.0));
        assert_eq!(r.n_test, 3);
        assert!(evaluate(&[], &[], meta("x")).is_err());
    }

    #[test]
    fn anti_oracle_by_enumeration() {
        // Anti-oracle ranks the negatives (score 1) first in index order
        // 1, 2, 4, then the positives 0, 3 at ranks 4 and 5.
        let y = [true, false, false, true, false];
        let s: Vec<f64> = y.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect();
        let ap = average_precision(&s, &y).unwrap().unwrap();
        assert_eq!(ap, (1.0 / 4.0 + 2.0 / 5.0) / 2.0);
    }

    #[test]
    fn compare_deltas_and_flags() {
        let mut a = EvaluationReport {
            model_id: "forest".into(),
            mask: Some("QIA".into()),
            split: "test".into(),
            threshold: Threshold::default(),
            n_test: 10,
            per_label_ap: [Some(0.8); 10],
            mean_ap: Some(0.8),
        };
        a.per_label_ap[3] = Some(0.1);
        let mut b = a.clone();
        b.model_id = "random".into();
        b.per_label_ap = [Some(0.3); 10];
        b.mean_ap = Some(0.3);
        let t = compare(&[a.clone(), b.clone()], 1).unwrap();
        assert_eq!(t.baseline, "random");
        let row = &t.rows[0];
        assert!((row.overall.delta.unwrap() - 0.5).abs() < 1e-12);
        assert!(row.labels[3].below_baseline);
        assert!((row.labels[3].delta.unwrap() + 0.2).abs() < 1e-12);
        assert_eq!(row.labels.iter().filter(|c| c.below_baseline).count(), 1);
        assert!(t.rows[1].labels.iter().all(|c| c.delta == Some(0.0)));

        let mut c = b.clone();
        c.split = "val".into();
        assert!(matches!(compare(&[a, c], 0), Err(Error::Incomparable(_))));
    }
}
