//! The disagreement-reason vocabulary.
//!
//! Nine taxonomy reasons plus `OTH`. The canonical order below is the order
//! used for task vectors, ground-truth vectors, CSV columns and model outputs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Number of reason labels.
pub const NUM_LABELS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReasonLabel {
    /// Low-quality image.
    Lqi,
    /// Insufficient visual evidence.
    Ive,
    /// Invalid question.
    Inv,
    /// Difficult question.
    Dff,
    /// Ambiguous visual question.
    Amb,
    /// Subjective question.
    Sbj,
    /// Synonymous answers.
    Syn,
    /// Answers at differing granularity.
    Grn,
    /// Spam answers.
    Spm,
    /// Other.
    Oth,
}

/// Which part of the visual question a reason is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// The question-image pair.
    QI,
    Answer,
    Ungrouped,
}

impl ReasonLabel {
    /// All labels in canonical order.
    pub const ALL: [ReasonLabel; NUM_LABELS] = [
        ReasonLabel::Lqi,
        ReasonLabel::Ive,
        ReasonLabel::Inv,
        ReasonLabel::Dff,
        ReasonLabel::Amb,
        ReasonLabel::Sbj,
        ReasonLabel::Syn,
        ReasonLabel::Grn,
        ReasonLabel::Spm,
        ReasonLabel::Oth,
    ];

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<ReasonLabel> {
        Self::ALL.get(index).copied()
    }

    pub fn code(self) -> &'static str {
        match self {
            ReasonLabel::Lqi => "LQI",
            ReasonLabel::Ive => "IVE",
            ReasonLabel::Inv => "INV",
            ReasonLabel::Dff => "DFF",
            ReasonLabel::Amb => "AMB",
            ReasonLabel::Sbj => "SBJ",
            ReasonLabel::Syn => "SYN",
            ReasonLabel::Grn => "GRN",
            ReasonLabel::Spm => "SPM",
            ReasonLabel::Oth => "OTH",
        }
    }

    pub fn side(self) -> Side {
        use ReasonLabel::*;
        match self {
            Lqi | Ive | Inv | Dff | Amb | Sbj => Side::QI,
            Syn | Grn | Spm => Side::Answer,
            Oth => Side::Ungrouped,
        }
    }
}

impl fmt::Display for ReasonLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label code '{0}'")]
pub struct UnknownLabel(pub String);

impl FromStr for ReasonLabel {
    type Err = UnknownLabel;

    /// Codes are case-insensitive; surrounding whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.code() == upper)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl Serialize for ReasonLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for ReasonLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of reason labels, stored as a 10-bit mask in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LabelSet(u16);

impl LabelSet {
    const MASK: u16 = (1 << NUM_LABELS) - 1;

    pub const fn empty() -> Self {
        LabelSet(0)
    }

    pub const fn all() -> Self {
        LabelSet(Self::MASK)
    }

    /// Builds a set from raw bits; bits above the tenth are discarded.
    pub const fn from_bits(bits: u16) -> Self {
        LabelSet(bits & Self::MASK)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, label: ReasonLabel) -> bool {
        self.0 & (1 << label.index()) != 0
    }

    pub fn insert(&mut self, label: ReasonLabel) -> bool {
        let had = self.contains(label);
        self.0 |= 1 << label.index();
        !had
    }

    pub fn remove(&mut self, label: ReasonLabel) {
        self.0 &= !(1 << label.index());
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 | other.0)
    }

    pub fn intersection(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 & other.0)
    }

    /// Members in canonical order.
    pub fn iter(self) -> impl Iterator<Item = ReasonLabel> {
        ReasonLabel::ALL.into_iter().filter(move |l| self.contains(*l))
    }

    /// 0/1 indicators in canonical order.
    pub fn to_bits_array(self) -> [u8; NUM_LABELS] {
        std::array::from_fn(|i| ((self.0 >> i) & 1) as u8)
    }
}

impl FromIterator<ReasonLabel> for LabelSet {
    fn from_iter<I: IntoIterator<Item = ReasonLabel>>(iter: I) -> Self {
        let mut set = LabelSet::empty();
        for label in iter {
            set.insert(label);
        }
        set
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes: Vec<_> = self.iter().map(ReasonLabel::code).collect();
        write!(f, "{{{}}}", codes.join(","))
    }
}

/// One worker's selections on one task as a 10-element 0/1 vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskVector {
    pub bits: [u8; NUM_LABELS],
}

impl TaskVector {
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn dot(&self, other: &TaskVector) -> u32 {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .map(|(&a, &b)| u32::from(a * b))
            .sum()
    }
}

impl From<LabelSet> for TaskVector {
    fn from(set: LabelSet) -> Self {
        TaskVector {
            bits: set.to_bits_array(),
        }
    }
}
