//! Visual question records, worker annotations and record validation.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::labels::{LabelSet, ReasonLabel, TaskVector};

/// Number of crowd answers per visual question.
pub const ANSWERS_PER_RECORD: usize = 10;
/// Number of reason annotations per visual question.
pub const ANNOTATIONS_PER_RECORD: usize = 5;

/// On-disk form of a record: one JSON object per line, label codes as strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRecord {
    pub id: String,
    pub dataset: String,
    pub question: String,
    pub image_id: String,
    pub answers: Vec<String>,
    pub annotations: Vec<RawAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAnnotation {
    pub worker_id: String,
    pub labels: Vec<String>,
}

/// One worker's reason selection for one visual question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkerAnnotation {
    pub worker_id: String,
    pub labels: LabelSet,
}

impl WorkerAnnotation {
    pub fn new(worker_id: impl Into<String>, labels: impl IntoIterator<Item = ReasonLabel>) -> Self {
        WorkerAnnotation {
            worker_id: worker_id.into(),
            labels: labels.into_iter().collect(),
        }
    }
}

/// A validated visual question with its 10 answers and 5 annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord", into = "RawRecord")]
pub struct VisualQuestionRecord {
    pub id: String,
    pub dataset: String,
    pub question: String,
    pub image_id: String,
    pub answers: Vec<String>,
    pub annotations: Vec<WorkerAnnotation>,
}

/// A single broken record invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyId,
    AnswerCount { got: usize },
    AnnotationCount { got: usize },
    EmptyLabels { annotation: usize },
    UnknownLabel { annotation: usize, code: String },
    DuplicateLabel { annotation: usize, label: ReasonLabel },
    DuplicateWorker { annotation: usize, worker_id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId => f.write_str("id: empty"),
            Violation::AnswerCount { got } => {
                write!(f, "answers: expected {ANSWERS_PER_RECORD}, got {got}")
            }
            Violation::AnnotationCount { got } => {
                write!(f, "annotations: expected {ANNOTATIONS_PER_RECORD}, got {got}")
            }
            Violation::EmptyLabels { annotation } => {
                write!(f, "annotation[{annotation}]: empty label set")
            }
            Violation::UnknownLabel { annotation, code } => {
                write!(f, "annotation[{annotation}]: unknown label code '{code}'")
            }
            Violation::DuplicateLabel { annotation, label } => {
                write!(f, "annotation[{annotation}]: duplicate label '{label}'")
            }
            Violation::DuplicateWorker {
                annotation,
                worker_id,
            } => write!(f, "annotation[{annotation}]: duplicate worker id '{worker_id}'"),
        }
    }
}

/// Wrapper so a list of violations can act as a conversion error.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct Violations(pub Vec<Violation>);

/// Lists every invariant the record breaks, in a fixed order: id, answer
/// count, annotation count, then each annotation in turn.
pub fn validate_record(record: &RawRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    if record.id.is_empty() {
        out.push(Violation::EmptyId);
    }
    if record.answers.len() != ANSWERS_PER_RECORD {
        out.push(Violation::AnswerCount {
            got: record.answers.len(),
        });
    }
    if record.annotations.len() != ANNOTATIONS_PER_RECORD {
        out.push(Violation::AnnotationCount {
            got: record.annotations.len(),
        });
    }
    let mut workers = HashSet::new();
    for (i, ann) in record.annotations.iter().enumerate() {
        if ann.labels.is_empty() {
            out.push(Violation::EmptyLabels { annotation: i });
        }
        let mut seen = LabelSet::empty();
        for code in &ann.labels {
            match code.parse::<ReasonLabel>() {
                Ok(label) => {
                    if !seen.insert(label) {
                        out.push(Violation::DuplicateLabel {
                            annotation: i,
                            label,
                        });
                    }
                }
                Err(_) => out.push(Violation::UnknownLabel {
                    annotation: i,
                    code: code.clone(),
                }),
            }
        }
        if !workers.insert(ann.worker_id.as_str()) {
            out.push(Violation::DuplicateWorker {
                annotation: i,
                worker_id: ann.worker_id.clone(),
            });
        }
    }
    out
}

impl TryFrom<RawRecord> for VisualQuestionRecord {
    type Error = Violations;

    fn try_from(raw: RawRecord) -> Result<Self, Self::Error> {
        let violations = validate_record(&raw);
        if !violations.is_empty() {
            return Err(Violations(violations));
        }
        let annotations = raw
            .annotations
            .into_iter()
            .map(|a| WorkerAnnotation {
                worker_id: a.worker_id,
                labels: a
                    .labels
                    .iter()
                    .map(|c| c.parse().expect("validated above"))
                    .collect(),
            })
            .collect();
        Ok(VisualQuestionRecord {
            id: raw.id,
            dataset: raw.dataset,
            question: raw.question,
            image_id: raw.image_id,
            answers: raw.answers,
            annotations,
        })
    }
}

impl From<VisualQuestionRecord> for RawRecord {
    fn from(r: VisualQuestionRecord) -> Self {
        RawRecord {
            id: r.id,
            dataset: r.dataset,
            question: r.question,
            image_id: r.image_id,
            answers: r.answers,
            annotations: r
                .annotations
                .into_iter()
                .map(|a| RawAnnotation {
                    worker_id: a.worker_id,
                    labels: a.labels.iter().map(|l| l.code().to_string()).collect(),
                })
                .collect(),
        }
    }
}

/// The 0/1 task vector of one worker's annotation, in canonical label order.
pub fn task_vector(annotation: &WorkerAnnotation) -> TaskVector {
    TaskVector::from(annotation.labels)
}
