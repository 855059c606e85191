//! Reason co-occurrence, reason clarity and worker–worker similarity.
//!
//! Co-occurrence of `d_j` given `d_i` is the causal-power style ratio
//!
//! ```text
//! (P(d_j | d_i) - P(d_j | not d_i)) / (1 - P(d_j | not d_i))
//! ```
//!
//! evaluated from integer counts so that the result is the correctly rounded
//! value of the exact rational.
//!
//! Worker similarity comes in three flavours, all computed over the tasks two
//! workers annotated in common (matched by record id):
//!
//! * common labels: `sum |L_i ∩ L_j| / sum |L_i|` (asymmetric in i, j),
//! * mean cosine between the two task vectors,
//! * Cohen's κ over the pooled per-label binary decisions of the pair.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::aggregation::{GroundTruthVector, Threshold};
use crate::error::{Error, Result};
use crate::labels::{LabelSet, ReasonLabel, NUM_LABELS};
use crate::record::VisualQuestionRecord;

pub fn co_occurrence(
    d_i: ReasonLabel,
    d_j: ReasonLabel,
    gtvs: &[GroundTruthVector],
) -> Result<Option<f64>> {
    if d_i == d_j {
        return Err(Error::InvalidArgument(format!(
            "co-occurrence needs two distinct reasons, got {d_i} twice"
        )));
    }
    if gtvs.is_empty() {
        return Err(Error::Empty("ground-truth list"));
    }
    // with_i: records having d_i; both: having d_i and d_j;
    // without_i: lacking d_i; j_without_i: lacking d_i but having d_j.
    let (mut with_i, mut both, mut without_i, mut j_without_i) = (0i64, 0i64, 0i64, 0i64);
    for g in gtvs {
        let j = g.has(d_j) as i64;
        if g.has(d_i) {
            with_i += 1;
            both += j;
        } else {
            without_i += 1;
            j_without_i += j;
        }
    }
    if with_i == 0 || without_i == 0 || j_without_i == without_i {
        return Ok(None);
    }
    // (both/with_i - jw/wo) / (1 - jw/wo) = (both·wo - jw·with_i) / (with_i·(wo - jw))
    let numerator = both * without_i - j_without_i * with_i;
    let denominator = with_i * (without_i - j_without_i);
    Ok(Some(numerator as f64 / denominator as f64))
}

/// Fraction of the records containing `d` in which `d` is the only reason.
pub fn clarity(d: ReasonLabel, gtvs: &[GroundTruthVector]) -> Option<f64> {
    let mut present = 0u64;
    let mut alone = 0u64;
    for g in gtvs.iter().filter(|g| g.has(d)) {
        present += 1;
        if g.labels.len() == 1 {
            alone += 1;
        }
    }
    (present > 0).then(|| alone as f64 / present as f64)
}

/// All pairwise co-occurrences at one threshold. Row `i`, column `j` holds
/// `co_occurrence(i, j)`; the diagonal is always `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoOccurrenceMatrix {
    pub values: [[Option<f64>; NUM_LABELS]; NUM_LABELS],
    pub threshold: Threshold,
}

pub fn co_occurrence_matrix(gtvs: &[GroundTruthVector]) -> Result<CoOccurrenceMatrix> {
    let first = gtvs.first().ok_or(Error::Empty("ground-truth list"))?;
    if gtvs.iter().any(|g| g.threshold != first.threshold) {
        return Err(Error::InvalidArgument(
            "ground-truth vectors mix validity thresholds".into(),
        ));
    }
    let mut values = [[None; NUM_LABELS]; NUM_LABELS];
    for d_i in ReasonLabel::ALL {
        for d_j in ReasonLabel::ALL {
            if d_i != d_j {
                values[d_i.index()][d_j.index()] = co_occurrence(d_i, d_j, gtvs)?;
            }
        }
    }
    Ok(CoOccurrenceMatrix {
        values,
        threshold: first.threshold,
    })
}

/// Label sets of `w_i` and `w_j` on every record both annotated, in record order.
fn shared_tasks<'a>(
    w_i: &'a str,
    w_j: &'a str,
    records: &'a [VisualQuestionRecord],
) -> impl Iterator<Item = (LabelSet, LabelSet)> + 'a {
    records.iter().filter_map(move |r| {
        let find = |w: &str| {
            r.annotations
                .iter()
                .find(|a| a.worker_id == w)
                .map(|a| a.labels)
        };
        Some((find(w_i)?, find(w_j)?))
    })
}

pub fn wws_common_labels(w_i: &str, w_j: &str, records: &[VisualQuestionRecord]) -> Option<f64> {
    let mut common = 0usize;
    let mut own = 0usize;
    let mut shared = 0usize;
    for (li, lj) in shared_tasks(w_i, w_j, records) {
        shared += 1;
        common += li.intersection(lj).len();
        own += li.len();
    }
    (shared > 0 && own > 0).then(|| common as f64 / own as f64)
}

/// Cosine of two label sets viewed as 0/1 vectors; `None` if either is empty.
pub fn label_cosine(a: LabelSet, b: LabelSet) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let dot = a.intersection(b).len() as f64;
    Some(dot / ((a.len() * b.len()) as f64).sqrt())
}

pub fn wws_cosine(w_i: &str, w_j: &str, records: &[VisualQuestionRecord]) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (li, lj) in shared_tasks(w_i, w_j, records) {
        if let Some(c) = label_cosine(li, lj) {
            sum += c;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// 2×2 agreement table of two raters over binary decisions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AgreementTable {
    pub both_yes: u64,
    pub only_first: u64,
    pub only_second: u64,
    pub both_no: u64,
}

impl AgreementTable {
    pub fn add(&mut self, first: bool, second: bool) {
        match (first, second) {
            (true, true) => self.both_yes += 1,
            (true, false) => self.only_first += 1,
            (false, true) => self.only_second += 1,
            (false, false) => self.both_no += 1,
        }
    }

    pub fn add_label_sets(&mut self, a: LabelSet, b: LabelSet) {
        for l in ReasonLabel::ALL {
            self.add(a.contains(l), b.contains(l));
        }
    }

    pub fn total(&self) -> u64 {
        self.both_yes + self.only_first + self.only_second + self.both_no
    }

    /// Cohen's κ; `None` when chance agreement is 1 or the table is empty.
    pub fn kappa(&self) -> Option<f64> {
        let n = self.total() as i128;
        if n == 0 {
            return None;
        }
        let (a, b, c, d) = (
            self.both_yes as i128,
            self.only_first as i128,
            self.only_second as i128,
            self.both_no as i128,
        );
        // Scaled by n²: p_o·n² = n(a+d), p_e·n² = (a+b)(a+c) + (c+d)(b+d).
        let observed = n * (a + d);
        let chance = (a + b) * (a + c) + (c + d) * (b + d);
        let denominator = n * n - chance;
        (denominator != 0).then(|| (observed - chance) as f64 / denominator as f64)
    }
}

/// Cohen's κ of two equal-length binary decision streams.
pub fn cohen_kappa(first: &[bool], second: &[bool]) -> Result<Option<f64>> {
    if first.len() != second.len() {
        return Err(Error::LengthMismatch {
            expected: first.len(),
            got: second.len(),
        });
    }
    let mut table = AgreementTable::default();
    for (&a, &b) in first.iter().zip(second) {
        table.add(a, b);
    }
    Ok(table.kappa())
}

pub fn wws_kappa(w_i: &str, w_j: &str, records: &[VisualQuestionRecord]) -> Option<f64> {
    let mut table = AgreementTable::default();
    for (li, lj) in shared_tasks(w_i, w_j, records) {
        table.add_label_sets(li, lj);
    }
    table.kappa()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkerPairStats {
    pub worker_i: String,
    pub worker_j: String,
    pub shared_tasks: usize,
    pub wws_common: Option<f64>,
    pub wws_cosine: Option<f64>,
    pub wws_kappa: Option<f64>,
}

#[derive(Default)]
struct PairAccumulator {
    shared: usize,
    common: usize,
    own: usize,
    cosine_sum: f64,
    cosine_n: usize,
    table: AgreementTable,
}

/// Statistics for every ordered pair of distinct workers sharing at least one
/// task, sorted by `(worker_i, worker_j)`.
pub fn worker_pair_stats(records: &[VisualQuestionRecord]) -> Vec<WorkerPairStats> {
    let mut pairs: BTreeMap<(&str, &str), PairAccumulator> = BTreeMap::new();
    for r in records {
        for a in &r.annotations {
            for b in &r.annotations {
                if a.worker_id == b.worker_id {
                    continue;
                }
                let acc = pairs
                    .entry((a.worker_id.as_str(), b.worker_id.as_str()))
                    .or_default();
                acc.shared += 1;
                acc.common += a.labels.intersection(b.labels).len();
                acc.own += a.labels.len();
                if let Some(c) = label_cosine(a.labels, b.labels) {
                    acc.cosine_sum += c;
                    acc.cosine_n += 1;
                }
                acc.table.add_label_sets(a.labels, b.labels);
            }
        }
    }
    pairs
        .into_iter()
        .map(|((wi, wj), acc)| WorkerPairStats {
            worker_i: wi.to_string(),
            worker_j: wj.to_string(),
            shared_tasks: acc.shared,
            wws_common: (acc.own > 0).then(|| acc.common as f64 / acc.own as f64),
            wws_cosine: (acc.cosine_n > 0).then(|| acc.cosine_sum / acc.cosine_n as f64),
            wws_kappa: acc.table.kappa(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkerSummary {
    pub worker_id: String,
    pub mean_wws_common: Option<f64>,
    pub mean_wws_cosine: Option<f64>,
    pub mean_wws_kappa: Option<f64>,
    /// Number of co-workers this worker shares at least one task with.
    pub pair_count: usize,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-worker averages of each similarity metric over that worker's pairings,
/// skipping undefined pairings. Sorted by worker id.
pub fn worker_summary(records: &[VisualQuestionRecord]) -> Vec<WorkerSummary> {
    let pair_stats = worker_pair_stats(records);
    let mut by_worker: BTreeMap<&str, Vec<&WorkerPairStats>> = BTreeMap::new();
    for r in records {
        for a in &r.annotations {
            by_worker.entry(a.worker_id.as_str()).or_default();
        }
    }
    for p in &pair_stats {
        by_worker.entry(p.worker_i.as_str()).or_default().push(p);
    }
    by_worker
        .into_iter()
        .map(|(w, ps)| WorkerSummary {
            worker_id: w.to_string(),
            mean_wws_common: mean_defined(ps.iter().map(|p| p.wws_common)),
            mean_wws_cosine: mean_defined(ps.iter().map(|p| p.wws_cosine)),
            mean_wws_kappa: mean_defined(ps.iter().map(|p| p.wws_kappa)),
            pair_count: ps.len(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::WorkerAnnotation;
    use ReasonLabel::*;

    fn gt(labels: &[ReasonLabel]) -> GroundTruthVector {
        GroundTruthVector {
            labels: labels.iter().copied().collect(),
            threshold: Threshold::default(),
        }
    }

    fn record(id: &str, anns: &[(&str, &[ReasonLabel])]) -> VisualQuestionRecord {
        VisualQuestionRecord {
            id: id.into(),
            dataset: "test".into(),
            question: "q".into(),
            image_id: "i".into(),
            answers: vec![String::new(); 10],
            annotations: anns
                .iter()
                .map(|(w, ls)| WorkerAnnotation::new(*w, ls.iter().copied()))
                .collect(),
        }
    }

    #[test]
    fn co_occurrence_examples() {
        let perfect = vec![gt(&[Amb, Syn]), gt(&[]), gt(&[Amb, Syn]), gt(&[Grn])];
        assert_eq!(co_occurrence(Amb, Syn, &perfect).unwrap(), Some(1.0));

        let independent = vec![gt(&[Amb, Syn]), gt(&[Amb]), gt(&[Syn]), gt(&[])];
        assert_eq!(co_occurrence(Amb, Syn, &independent).unwrap(), Some(0.0));

        let hand = vec![gt(&[Amb, Syn]), gt(&[Amb, Syn]), gt(&[Amb]), gt(&[Syn]), gt(&[])];
        let v = co_occurrence(Amb, Syn, &hand).unwrap().unwrap();
        assert_eq!(v, 1.0 / 3.0);

        let always_j = vec![gt(&[Amb, Syn]), gt(&[Syn])];
        assert_eq!(co_occurrence(Amb, Syn, &always_j).unwrap(), None);

        assert!(co_occurrence(Amb, Amb, &hand).is_err());
        assert!(co_occurrence(Amb, Syn, &[]).is_err());
    }

    #[test]
    fn clarity_examples() {
        assert_eq!(clarity(Spm, &[gt(&[Spm]), gt(&[Spm]), gt(&[Amb])]), Some(1.0));
        assert_eq!(clarity(Amb, &[gt(&[Amb, Syn]), gt(&[Amb, Grn])]), Some(0.0));
        let four = vec![gt(&[Amb]), gt(&[Amb, Syn]), gt(&[Amb, Grn]), gt(&[Amb, Lqi]), gt(&[Syn])];
        assert_eq!(clarity(Amb, &four), Some(0.25));
        assert_eq!(clarity(Oth, &four), None);
    }

    #[test]
    fn matrix_has_empty_diagonal() {
        let g = vec![gt(&[Amb, Syn]), gt(&[Amb]), gt(&[Syn, Grn]), gt(&[])];
        let m = co_occurrence_matrix(&g).unwrap();
        for i in 0..NUM_LABELS {
            assert_eq!(m.values[i][i], None);
        }
        assert_eq!(m.values[Amb.index()][Syn.index()], co_occurrence(Amb, Syn, &g).unwrap());
    }

    #[test]
    fn common_labels_is_asymmetric() {
        let recs = vec![record("t1", &[("i", &[Amb, Syn]), ("j", &[Amb])])];
        assert_eq!(wws_common_labels("i", "j", &recs), Some(0.5));
        assert_eq!(wws_common_labels("j", "i", &recs), Some(1.0));
        assert_eq!(wws_common_labels("i", "nobody", &recs), None);
    }

    #[test]
    fn common_labels_identical_and_disjoint() {
        let recs = vec![
            record("t1", &[("i", &[Amb, Syn]), ("j", &[Amb, Syn])]),
            record("t2", &[("i", &[Lqi]), ("j", &[Lqi])]),
        ];
        assert_eq!(wws_common_labels("i", "j", &recs), Some(1.0));
        let recs = vec![record("t1", &[("i", &[Amb]), ("j", &[Syn])])];
        assert_eq!(wws_common_labels("i", "j", &recs), Some(0.0));
    }

    #[test]
    fn cosine_cases() {
        let recs = vec![record("t1", &[("i", &[Amb, Syn]), ("j", &[Amb])])];
        let c = wws_cosine("i", "j", &recs).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let recs = vec![record("t1", &[("i", &[Amb]), ("j", &[Amb])])];
        assert_eq!(wws_cosine("i", "j", &recs), Some(1.0));
        let recs = vec![record("t1", &[("i", &[Amb]), ("j", &[Lqi])])];
        assert_eq!(wws_cosine("i", "j", &recs), Some(0.0));
    }

    #[test]
    fn kappa_cases() {
        let k = cohen_kappa(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!(k, Some(0.0));
        let s = [true, false, true, true, false];
        assert_eq!(cohen_kappa(&s, &s).unwrap(), Some(1.0));
        assert_eq!(cohen_kappa(&[true; 4], &[true; 4]).unwrap(), None);
        assert_eq!(cohen_kappa(&[false; 4], &[false; 4]).unwrap(), None);
        assert!(cohen_kappa(&[true], &[]).is_err());
    }

    #[test]
    fn pair_stats_agree_with_direct_metrics() {
        let recs = vec![
            record("t1", &[("a", &[Amb, Syn]), ("b", &[Amb]), ("c", &[Grn])]),
            record("t2", &[("a", &[Lqi]), ("b", &[Lqi, Ive])]),
            record("t3", &[("b", &[Syn]), ("c", &[Syn, Grn])]),
        ];
        for p in worker_pair_stats(&recs) {
            let (i, j) = (p.worker_i.as_str(), p.worker_j.as_str());
            assert_eq!(p.wws_common, wws_common_labels(i, j, &recs));
            assert_eq!(p.wws_cosine, wws_cosine(i, j, &recs));
            assert_eq!(p.wws_kappa, wws_kappa(i, j, &recs));
        }
    }

    #[test]
    fn summary_single_worker_has_no_metrics() {
        let recs = vec![record("t1", &[("solo", &[Amb])])];
        let s = worker_summary(&recs);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].pair_count, 0);
        assert_eq!(s[0].mean_wws_common, None);
        assert_eq!(s[0].mean_wws_kappa, None);
    }

    #[test]
    fn summary_identical_workers() {
        let recs = vec![
            record("t1", &[("a", &[Amb, Syn]), ("b", &[Amb, Syn])]),
            record("t2", &[("a", &[Lqi]), ("b", &[Lqi])]),
        ];
        let s = worker_summary(&recs);
        for row in &s {
            assert_eq!(row.mean_wws_common, Some(1.0));
            assert_eq!(row.mean_wws_cosine, Some(1.0));
            assert_eq!(row.mean_wws_kappa, Some(1.0));
        }
    }

    #[test]
    fn summary_three_worker_fixture() {
        // t1: a={AMB,SYN} b={AMB} c={GRN}; t2: a={LQI} b={LQI,IVE}
        let recs = vec![
            record("t1", &[("a", &[Amb, Syn]), ("b", &[Amb]), ("c", &[Grn])]),
            record("t2", &[("a", &[Lqi]), ("b", &[Lqi, Ive])]),
        ];
        let s = worker_summary(&recs);
        let a = &s[0];
        assert_eq!(a.worker_id, "a");
        assert_eq!(a.pair_count, 2);
        // common(a,b) = (1 + 1) / (2 + 1) = 2/3; common(a,c) = 0/2 = 0.
        assert_eq!(a.mean_wws_common, Some((2.0 / 3.0 + 0.0) / 2.0));
        // cos(a,b) = mean(1/√2, 1/√2); cos(a,c) = 0.
        let expected_cos = (std::f64::consts::FRAC_1_SQRT_2 + 0.0) / 2.0;
        assert!((a.mean_wws_cosine.unwrap() - expected_cos).abs() < 1e-12);
        // κ(a,b): 20 decisions, a=2 both yes, b=1 only a (SYN), c=1 only b (IVE), d=16.
        // p_o = 18/20, p_e = (3·3 + 17·17)/400 = 298/400 → κ = (360-298)/(400-298) = 62/102.
        // κ(a,c): 10 decisions, a=0, b=2, c=1, d=7 → n(a+d)=70, chance=2·1+8·9=74, κ=(70-74)/(100-74).
        let k_ab = 62.0 / 102.0;
        let k_ac = -4.0 / 26.0;
        assert!((a.mean_wws_kappa.unwrap() - (k_ab + k_ac) / 2.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn kappa_bounded(a in proptest::collection::vec(proptest::bool::ANY, 1..60), seed in proptest::collection::vec(proptest::bool::ANY, 60)) {
            let b: Vec<bool> = a.iter().zip(seed.iter()).map(|(x, y)| x ^ y).collect();
            if let Some(k) = cohen_kappa(&a, &b).unwrap() {
                proptest::prop_assert!((-1.0..=1.0).contains(&k));
            }
        }

        #[test]
        fn self_similarity_is_one(sets in proptest::collection::vec(1u16..1024, 1..20)) {
            let recs: Vec<_> = sets
                .iter()
                .enumerate()
                .map(|(t, &bits)| VisualQuestionRecord {
                    id: format!("t{t}"),
                    dataset: "x".into(),
                    question: String::new(),
                    image_id: String::new(),
                    answers: vec![String::new(); 10],
                    annotations: vec![WorkerAnnotation { worker_id: "w".into(), labels: LabelSet::from_bits(bits) }],
                })
                .collect();
            proptest::prop_assert_eq!(wws_common_labels("w", "w", &recs), Some(1.0));
            let c = wws_cosine("w", "w", &recs).unwrap();
            proptest::prop_assert!((c - 1.0).abs() < 1e-12);
        }

        #[test]
        fn cosine_order_invariant(pairs in proptest::collection::vec((1u16..1024, 1u16..1024), 1..20)) {
            let build = |ps: &[(u16, u16)]| -> Vec<VisualQuestionRecord> {
                ps.iter().enumerate().map(|(t, &(x, y))| VisualQuestionRecord {
                    id: format!("t{t}"),
                    dataset: "x".into(),
                    question: String::new(),
                    image_id: String::new(),
                    answers: vec![String::new(); 10],
                    annotations: vec![
                        WorkerAnnotation { worker_id: "i".into(), labels: LabelSet::from_bits(x) },
                        WorkerAnnotation { worker_id: "j".into(), labels: LabelSet::from_bits(y) },
                    ],
                }).collect()
            };
            let fwd = build(&pairs);
            let mut rev_pairs = pairs.clone();
            rev_pairs.reverse();
            let rev = build(&rev_pairs);
            let a = wws_cosine("i", "j", &fwd).unwrap();
            let b = wws_cosine("i", "j", &rev).unwrap();
            proptest::prop_assert!((a - b).abs() < 1e-12);
            proptest::prop_assert_eq!(wws_common_labels("i", "j", &fwd), wws_common_labels("i", "j", &rev));
        }
    }
}
