//! Handcrafted image, question and answer features.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ingestion::ImageFeatures;
use crate::record::VisualQuestionRecord;

/// Length of a full feature vector.
pub const NUM_FEATURES: usize = 20;

/// Slot names in canonical order.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "I:num_categories",
    "I:num_tags",
    "I:num_colors",
    "I:num_faces",
    "Q:word_count",
    "Q:has_color_word",
    "Q:atype_numeric",
    "Q:atype_yesno",
    "Q:atype_other",
    "Q:atype_unanswerable",
    "A1:word_count",
    "A2:word_count",
    "A3:word_count",
    "A4:word_count",
    "A5:word_count",
    "A6:word_count",
    "A7:word_count",
    "A8:word_count",
    "A9:word_count",
    "A10:word_count",
];

const ATYPE_SLOTS: Range<usize> = 6..10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnswerType {
    Numeric,
    YesNo,
    Unanswerable,
    Other,
}

impl AnswerType {
    /// Tie-break order for the plurality vote, highest priority first.
    const PRIORITY: [AnswerType; 4] = [
        AnswerType::Unanswerable,
        AnswerType::YesNo,
        AnswerType::Numeric,
        AnswerType::Other,
    ];

    fn slot(self) -> usize {
        match self {
            AnswerType::Numeric => 6,
            AnswerType::YesNo => 7,
            AnswerType::Other => 8,
            AnswerType::Unanswerable => 9,
        }
    }
}

const NUMBER_WORDS: &[&str] = &[
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    "hundred", "thousand", "million", "billion",
];

fn is_numeric_token(token: &str) -> bool {
    if NUMBER_WORDS.contains(&token) {
        return true;
    }
    let stripped: String = token.chars().filter(|&c| c != ',').collect();
    stripped.chars().any(|c| c.is_ascii_digit()) && stripped.parse::<f64>().is_ok()
}

pub fn classify_answer_type(answer: &str) -> AnswerType {
    let text = answer.trim().to_lowercase();
    match text.as_str() {
        "yes" | "no" => return AnswerType::YesNo,
        "unanswerable" | "unsuitable" | "unsuitable image" => return AnswerType::Unanswerable,
        _ => {}
    }
    let mut tokens = text.split_whitespace().peekable();
    if tokens.peek().is_some() && tokens.all(is_numeric_token) {
        AnswerType::Numeric
    } else {
        AnswerType::Other
    }
}

/// Plurality answer type, ties broken Unanswerable > YesNo > Numeric > Other.
pub fn most_common_answer_type<S: AsRef<str>>(answers: &[S]) -> AnswerType {
    let mut counts = [0usize; 4];
    for a in answers {
        let t = classify_answer_type(a.as_ref());
        counts[AnswerType::PRIORITY.iter().position(|&p| p == t).unwrap()] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    // PRIORITY is ordered, so the first class reaching the maximum wins ties.
    AnswerType::PRIORITY[counts.iter().position(|&c| c == best).unwrap()]
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

pub fn has_color_word(question: &str) -> bool {
    question.split_whitespace().any(|tok| {
        let word = tok
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        matches!(word.as_str(), "color" | "colour" | "colors" | "colours")
    })
}

/// The 20 feature slots of one record, in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn answer_type(&self) -> AnswerType {
        let slot = ATYPE_SLOTS
            .clone()
            .find(|&i| self.0[i] == 1.0)
            .expect("exactly one answer-type slot is set");
        [
            AnswerType::Numeric,
            AnswerType::YesNo,
            AnswerType::Other,
            AnswerType::Unanswerable,
        ][slot - ATYPE_SLOTS.start]
    }
}

pub fn extract_features(record: &VisualQuestionRecord, image: &ImageFeatures) -> FeatureVector {
    let mut v = [0.0; NUM_FEATURES];
    v[0] = f64::from(image.num_categories);
    v[1] = f64::from(image.num_tags);
    v[2] = f64::from(image.num_colors);
    v[3] = f64::from(image.num_faces);
    v[4] = word_count(&record.question) as f64;
    v[5] = if has_color_word(&record.question) { 1.0 } else { 0.0 };
    v[most_common_answer_type(&record.answers).slot()] = 1.0;
    for (slot, answer) in v[10..].iter_mut().zip(&record.answers) {
        *slot = word_count(answer) as f64;
    }
    FeatureVector(v)
}

/// Feature subsets for ablation studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AblationMask {
    QIA,
    QI,
    Q,
    I,
    A,
}

impl AblationMask {
    pub const ALL: [AblationMask; 5] = [
        AblationMask::QIA,
        AblationMask::QI,
        AblationMask::Q,
        AblationMask::I,
        AblationMask::A,
    ];

    /// Slot indices kept by this mask; every mask is a contiguous block.
    pub fn slots(self) -> Range<usize> {
        match self {
            AblationMask::QIA => 0..20,
            AblationMask::QI => 0..10,
            AblationMask::Q => 4..10,
            AblationMask::I => 0..4,
            AblationMask::A => 10..20,
        }
    }

    pub fn len(self) -> usize {
        self.slots().len()
    }

    pub fn feature_names(self) -> Vec<String> {
        FEATURE_NAMES[self.slots()].iter().map(|s| s.to_string()).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            AblationMask::QIA => "QIA",
            AblationMask::QI => "QI",
            AblationMask::Q => "Q",
            AblationMask::I => "I",
            AblationMask::A => "A",
        }
    }
}

impl fmt::Display for AblationMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let upper = s.to_ascii_uppercase();
        AblationMask::ALL
            .into_iter()
            .find(|m| m.name() == upper || (upper == "QI+A" && *m == AblationMask::QIA))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature mask '{s}'")))
    }
}

pub fn apply_mask(vector: &FeatureVector, mask: AblationMask) -> Vec<f64> {
    vector.0[mask.slots()].to_vec()
}
