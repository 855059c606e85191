//! Maps detected disagreement reasons to the resolution steps of an
//! assistive VQA pipeline.
//!
//! The table is a fixed reading of the pipeline: image steps (I1 specificity
//! selection, I2 enhancement), question steps (Q1 grammar correction, Q2
//! disambiguation), a warning to the asker for subjective or difficult
//! questions, a retake prompt when the image lacks the evidence, and answer
//! steps (A1 spam filtering, A2 synonym normalization, A3 granularity
//! comparison).

use std::fmt;

use serde::{Serialize, Serializer};

use crate::labels::{LabelSet, ReasonLabel, NUM_LABELS};

/// Binarization cutoff for predicted scores.
pub const ROUTE_SCORE_CUTOFF: f64 = 0.5;

/// Declaration order is pipeline order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResolutionStep {
    SpecificitySelection,
    ImageEnhancement,
    GrammarCorrection,
    Disambiguation,
    UserWarning,
    RetakePrompt,
    SpamFilter,
    SynonymNormalization,
    GranularityComparison,
}

impl ResolutionStep {
    pub fn id(self) -> &'static str {
        match self {
            ResolutionStep::SpecificitySelection => "I1",
            ResolutionStep::ImageEnhancement => "I2",
            ResolutionStep::GrammarCorrection => "Q1",
            ResolutionStep::Disambiguation => "Q2",
            ResolutionStep::UserWarning => "user-warning",
            ResolutionStep::RetakePrompt => "retake-prompt",
            ResolutionStep::SpamFilter => "A1",
            ResolutionStep::SynonymNormalization => "A2",
            ResolutionStep::GranularityComparison => "A3",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ResolutionStep::SpecificitySelection => "specificity-selection",
            ResolutionStep::ImageEnhancement => "image-enhancement",
            ResolutionStep::GrammarCorrection => "grammar-correction",
            ResolutionStep::Disambiguation => "disambiguation",
            ResolutionStep::UserWarning => "user-warning",
            ResolutionStep::RetakePrompt => "retake-prompt",
            ResolutionStep::SpamFilter => "spam-filter",
            ResolutionStep::SynonymNormalization => "synonym-normalization",
            ResolutionStep::GranularityComparison => "granularity-comparison",
        }
    }
}

impl fmt::Display for ResolutionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Serialize for ResolutionStep {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

/// Steps recruited for one reason.
pub fn resolution_route(label: ReasonLabel) -> &'static [ResolutionStep] {
    use ResolutionStep::*;
    match label {
        ReasonLabel::Lqi => &[ImageEnhancement],
        ReasonLabel::Amb => &[SpecificitySelection, Disambiguation],
        ReasonLabel::Inv => &[GrammarCorrection],
        ReasonLabel::Ive => &[RetakePrompt],
        ReasonLabel::Sbj | ReasonLabel::Dff => &[UserWarning],
        ReasonLabel::Spm => &[SpamFilter],
        ReasonLabel::Syn => &[SynonymNormalization],
        ReasonLabel::Grn => &[GranularityComparison],
        ReasonLabel::Oth => &[],
    }
}

/// Union of the routes of all active labels, deduplicated, in pipeline order.
pub fn route_resolutions(labels: LabelSet) -> Vec<ResolutionStep> {
    let mut steps: Vec<ResolutionStep> = labels
        .iter()
        .flat_map(|l| resolution_route(l).iter().copied())
        .collect();
    steps.sort();
    steps.dedup();
    steps
}

/// Labels whose predicted score reaches [`ROUTE_SCORE_CUTOFF`].
pub fn active_labels(scores: &[f64; NUM_LABELS]) -> LabelSet {
    ReasonLabel::ALL
        .into_iter()
        .filter(|l| scores[l.index()] >= ROUTE_SCORE_CUTOFF)
        .collect()
}
