//! Ground truth from worker annotations at a validity threshold, and the
//! descriptive tallies computed over it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{LabelSet, ReasonLabel, Side, NUM_LABELS};
use crate::record::WorkerAnnotation;

/// Minimum number of workers (1..=5) who must pick a reason for it to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Threshold(u8);

impl Threshold {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 5;

    pub fn new(k: i64) -> Result<Self> {
        if (i64::from(Self::MIN)..=i64::from(Self::MAX)).contains(&k) {
            Ok(Threshold(k as u8))
        } else {
            Err(Error::ThresholdOutOfRange(k))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Threshold> {
        (Self::MIN..=Self::MAX).map(Threshold)
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold(2)
    }
}

impl TryFrom<u8> for Threshold {
    type Error = Error;
    fn try_from(k: u8) -> Result<Self> {
        Threshold::new(i64::from(k))
    }
}

impl From<Threshold> for u8 {
    fn from(t: Threshold) -> u8 {
        t.0
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binary reason flags for one record at a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroundTruthVector {
    pub labels: LabelSet,
    pub threshold: Threshold,
}

impl GroundTruthVector {
    pub fn has(&self, label: ReasonLabel) -> bool {
        self.labels.contains(label)
    }

    pub fn bits(&self) -> [u8; NUM_LABELS] {
        self.labels.to_bits_array()
    }
}

/// Per-label count of workers selecting each reason.
pub fn vote_counts(annotations: &[WorkerAnnotation]) -> [usize; NUM_LABELS] {
    let mut counts = [0; NUM_LABELS];
    for ann in annotations {
        for label in ann.labels.iter() {
            counts[label.index()] += 1;
        }
    }
    counts
}

/// A reason is present iff at least `k` of the workers selected it.
pub fn aggregate_ground_truth(annotations: &[WorkerAnnotation], k: Threshold) -> GroundTruthVector {
    let counts = vote_counts(annotations);
    let labels = ReasonLabel::ALL
        .into_iter()
        .filter(|l| counts[l.index()] >= usize::from(k.get()))
        .collect();
    GroundTruthVector {
        labels,
        threshold: k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceType {
    QIOnly,
    AOnly,
    Both,
    Neither,
}

impl SourceType {
    pub const ALL: [SourceType; 4] = [
        SourceType::QIOnly,
        SourceType::AOnly,
        SourceType::Both,
        SourceType::Neither,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SourceType::QIOnly => "qi_only",
            SourceType::AOnly => "a_only",
            SourceType::Both => "both",
            SourceType::Neither => "neither",
        }
    }
}

/// Whether the present reasons stem from the question-image pair, the
/// answers, both, or neither. `OTH` belongs to no side and is ignored.
pub fn source_type(gtv: &GroundTruthVector) -> SourceType {
    let qi = gtv.labels.iter().any(|l| l.side() == Side::QI);
    let ans = gtv.labels.iter().any(|l| l.side() == Side::Answer);
    match (qi, ans) {
        (true, true) => SourceType::Both,
        (true, false) => SourceType::QIOnly,
        (false, true) => SourceType::AOnly,
        (false, false) => SourceType::Neither,
    }
}

pub fn unique_reason_count(gtv: &GroundTruthVector) -> usize {
    gtv.labels.len()
}

/// Fraction of records with each reason present, in canonical order.
pub fn label_frequency(gtvs: &[GroundTruthVector]) -> Result<[f64; NUM_LABELS]> {
    if gtvs.is_empty() {
        return Err(Error::Empty("ground-truth list"));
    }
    let mut counts = [0usize; NUM_LABELS];
    for g in gtvs {
        for l in g.labels.iter() {
            counts[l.index()] += 1;
        }
    }
    let n = gtvs.len() as f64;
    Ok(counts.map(|c| c as f64 / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceTypeDistribution {
    pub qi_only: f64,
    pub a_only: f64,
    pub both: f64,
    pub neither: f64,
}

impl SourceTypeDistribution {
    pub fn get(&self, t: SourceType) -> f64 {
        match t {
            SourceType::QIOnly => self.qi_only,
            SourceType::AOnly => self.a_only,
            SourceType::Both => self.both,
            SourceType::Neither => self.neither,
        }
    }
}

pub fn source_type_distribution(gtvs: &[GroundTruthVector]) -> Result<SourceTypeDistribution> {
    if gtvs.is_empty() {
        return Err(Error::Empty("ground-truth list"));
    }
    let mut counts = [0usize; 4];
    for g in gtvs {
        counts[source_type(g) as usize] += 1;
    }
    let n = gtvs.len() as f64;
    Ok(SourceTypeDistribution {
        qi_only: counts[SourceType::QIOnly as usize] as f64 / n,
        a_only: counts[SourceType::AOnly as usize] as f64 / n,
        both: counts[SourceType::Both as usize] as f64 / n,
        neither: counts[SourceType::Neither as usize] as f64 / n,
    })
}

/// Histogram of unique-reason counts: entry `c` is the number of records
/// with exactly `c` reasons present.
pub fn unique_reason_histogram(gtvs: &[GroundTruthVector]) -> [usize; NUM_LABELS + 1] {
    let mut hist = [0; NUM_LABELS + 1];
    for g in gtvs {
        hist[unique_reason_count(g)] += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use ReasonLabel::*;

    fn k(v: i64) -> Threshold {
        Threshold::new(v).unwrap()
    }

    fn gt(labels: &[ReasonLabel]) -> GroundTruthVector {
        GroundTruthVector {
            labels: labels.iter().copied().collect(),
            threshold: k(2),
        }
    }

    fn anns(sets: [&[ReasonLabel]; 5]) -> Vec<WorkerAnnotation> {
        sets.iter()
            .enumerate()
            .map(|(i, s)| WorkerAnnotation::new(format!("w{i}"), s.iter().copied()))
            .collect()
    }

    #[test]
    fn threshold_range() {
        assert!(Threshold::new(0).is_err());
        assert!(Threshold::new(6).is_err());
        assert_eq!(Threshold::all().count(), 5);
    }

    #[test]
    fn aggregate_examples() {
        let a = anns([&[Amb], &[Amb, Syn], &[Amb], &[Oth], &[Grn]]);
        assert_eq!(aggregate_ground_truth(&a, k(2)).labels, [Amb].into_iter().collect());
        assert_eq!(
            aggregate_ground_truth(&a, k(1)).labels,
            [Amb, Syn, Oth, Grn].into_iter().collect()
        );
        let a = anns([&[Lqi], &[Lqi], &[Lqi], &[Lqi], &[Ive]]);
        assert!(!aggregate_ground_truth(&a, k(5)).has(Lqi));
        assert!(aggregate_ground_truth(&a, k(4)).has(Lqi));
    }

    #[test]
    fn source_types() {
        assert_eq!(source_type(&gt(&[Amb, Syn])), SourceType::Both);
        assert_eq!(source_type(&gt(&[Lqi, Dff])), SourceType::QIOnly);
        assert_eq!(source_type(&gt(&[Grn])), SourceType::AOnly);
        assert_eq!(source_type(&gt(&[Oth])), SourceType::Neither);
        assert_eq!(source_type(&gt(&[])), SourceType::Neither);
    }

    #[test]
    fn unique_counts() {
        assert_eq!(unique_reason_count(&gt(&[Amb, Syn, Grn])), 3);
        assert_eq!(unique_reason_count(&gt(&[])), 0);
        assert_eq!(unique_reason_count(&gt(&ReasonLabel::ALL)), 10);
    }

    #[test]
    fn frequencies() {
        let g = vec![gt(&[Amb]), gt(&[Amb, Syn]), gt(&[Amb]), gt(&[])];
        let f = label_frequency(&g).unwrap();
        assert_eq!(f[Amb.index()], 0.75);
        assert_eq!(f[Syn.index()], 0.25);
        assert_eq!(label_frequency(&[gt(&[]), gt(&[])]).unwrap(), [0.0; 10]);
        assert!(label_frequency(&[]).is_err());

        // 10 records, AMB planted in the first 8.
        let planted: Vec<_> = (0..10)
            .map(|i| if i < 8 { gt(&[Amb, Grn]) } else { gt(&[Sbj]) })
            .collect();
        assert_eq!(label_frequency(&planted).unwrap()[Amb.index()], 0.8);
    }

    #[test]
    fn source_distribution() {
        let all_both = vec![gt(&[Amb, Syn]); 3];
        assert_eq!(source_type_distribution(&all_both).unwrap().both, 1.0);
        let half = vec![gt(&[Lqi]), gt(&[Syn]), gt(&[Lqi]), gt(&[Syn])];
        let d = source_type_distribution(&half).unwrap();
        assert_eq!((d.qi_only, d.a_only), (0.5, 0.5));

        // Hand-enumerated: 3 QI-only, 2 A-only, 2 both, 1 neither.
        let mixed = vec![
            gt(&[Lqi]),
            gt(&[Amb, Sbj]),
            gt(&[Inv, Oth]),
            gt(&[Syn]),
            gt(&[Spm]),
            gt(&[Amb, Grn]),
            gt(&[Dff, Syn, Oth]),
            gt(&[Oth]),
        ];
        let d = source_type_distribution(&mixed).unwrap();
        assert_eq!(d.qi_only, 3.0 / 8.0);
        assert_eq!(d.a_only, 2.0 / 8.0);
        assert_eq!(d.both, 2.0 / 8.0);
        assert_eq!(d.neither, 1.0 / 8.0);
        assert!(source_type_distribution(&[]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn threshold_monotone_union_intersection(sets in proptest::array::uniform5(1u16..1024)) {
            let a: Vec<_> = sets
                .iter()
                .enumerate()
                .map(|(i, &b)| WorkerAnnotation { worker_id: format!("w{i}"), labels: LabelSet::from_bits(b) })
                .collect();
            let union = sets.iter().fold(0u16, |acc, b| acc | b);
            let inter = sets.iter().fold(0x3FFu16, |acc, b| acc & b);
            proptest::prop_assert_eq!(aggregate_ground_truth(&a, k(1)).labels.bits(), union);
            proptest::prop_assert_eq!(aggregate_ground_truth(&a, k(5)).labels.bits(), inter);
            for kk in 1..5 {
                let lo = aggregate_ground_truth(&a, k(kk)).labels;
                let hi = aggregate_ground_truth(&a, k(kk + 1)).labels;
                proptest::prop_assert_eq!(hi.intersection(lo), hi);
            }
        }

        #[test]
        fn distribution_sums_to_one(bits in proptest::collection::vec(0u16..1024, 1..200)) {
            let g: Vec<_> = bits
                .iter()
                .map(|&b| GroundTruthVector { labels: LabelSet::from_bits(b), threshold: k(2) })
                .collect();
            let d = source_type_distribution(&g).unwrap();
            let s = d.qi_only + d.a_only + d.both + d.neither;
            proptest::prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }
}
