//! Synthetic fixture generator with planted, verifiable effects.
//!
//! Each record draws three hidden conditions: a long question (10–15 words),
//! an image with few tags (fewer than 6), and a question about colour. The
//! conditions raise the probability of latent reasons:
//!
//! | label | condition  | p if true | p if false |
//! |-------|------------|-----------|------------|
//! | AMB   | long       | 0.95      | 0.03       |
//! | LQI   | few tags   | 0.95      | 0.03       |
//! | IVE   | few tags   | 0.90      | 0.03       |
//! | SYN   | colour     | 0.95      | 0.03       |
//! | GRN   | colour     | 0.90      | 0.03       |
//!
//! INV, DFF, SBJ and SPM occur at 0.03 and OTH at 0.02 regardless; a record
//! with no latent reason gets OTH. Records with latent LQI or IVE receive
//! "unanswerable" answers half of the time.
//!
//! Five workers per record, drawn from a fixed pool, each report the latent
//! set with every label flipped independently with probability `noise`. A
//! worker whose set ends up empty reports OTH.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate_ground_truth, label_frequency, Threshold};
use crate::error::{Error, Result};
use crate::ingestion::{write_image_features, write_records, ImageFeatures};
use crate::labels::{LabelSet, ReasonLabel, NUM_LABELS};
use crate::record::{WorkerAnnotation, VisualQuestionRecord, ANNOTATIONS_PER_RECORD, ANSWERS_PER_RECORD};

pub const MIN_SYNTH_RECORDS: usize = 20;

const LONG_QUESTION_MIN_WORDS: usize = 10;
const QUESTION_WORDS: std::ops::RangeInclusive<usize> = 3..=15;
const FEW_TAGS_BELOW: u32 = 6;
const MAX_TAGS: u32 = 14;
const COLOR_QUESTION_RATE: f64 = 0.4;
const BASE_RATE: f64 = 0.03;
const OTHER_RATE: f64 = 0.02;
const UNANSWERABLE_RATE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub seed: u64,
    /// Per-label probability that a worker flips the latent bit.
    pub noise: f64,
    pub n_workers: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n: 2000,
            seed: 0,
            noise: 0.1,
            n_workers: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    LongQuestion,
    FewTags,
    ColorQuestion,
    Always,
}

impl Condition {
    fn rate(self) -> f64 {
        match self {
            Condition::LongQuestion => {
                let total = QUESTION_WORDS.end() - QUESTION_WORDS.start() + 1;
                (QUESTION_WORDS.end() - LONG_QUESTION_MIN_WORDS + 1) as f64 / total as f64
            }
            Condition::FewTags => f64::from(FEW_TAGS_BELOW) / f64::from(MAX_TAGS + 1),
            Condition::ColorQuestion => COLOR_QUESTION_RATE,
            Condition::Always => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedRule {
    pub label: ReasonLabel,
    pub condition: Condition,
    pub p_if_true: f64,
    pub p_if_false: f64,
}

impl PlantedRule {
    /// Marginal probability the latent reason is present.
    pub fn latent_rate(&self) -> f64 {
        let c = self.condition.rate();
        c * self.p_if_true + (1.0 - c) * self.p_if_false
    }
}

/// The generative rules for the nine taxonomy reasons.
pub fn planted_rules() -> Vec<PlantedRule> {
    use Condition::*;
    use ReasonLabel::*;
    let rule = |label, condition, p_if_true, p_if_false| PlantedRule {
        label,
        condition,
        p_if_true,
        p_if_false,
    };
    vec![
        rule(Lqi, FewTags, 0.95, BASE_RATE),
        rule(Ive, FewTags, 0.90, BASE_RATE),
        rule(Inv, Always, BASE_RATE, BASE_RATE),
        rule(Dff, Always, BASE_RATE, BASE_RATE),
        rule(Amb, LongQuestion, 0.95, BASE_RATE),
        rule(Sbj, Always, BASE_RATE, BASE_RATE),
        rule(Syn, ColorQuestion, 0.95, BASE_RATE),
        rule(Grn, ColorQuestion, 0.90, BASE_RATE),
        rule(Spm, Always, BASE_RATE, BASE_RATE),
    ]
}

/// `P(Binomial(n, p) >= k)`.
fn binomial_tail(n: u32, p: f64, k: u32) -> f64 {
    (k..=n)
        .map(|i| {
            let choose = (0..i).fold(1.0, |acc, j| acc * f64::from(n - j) / f64::from(j + 1));
            choose * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32)
        })
        .sum()
}

/// Expected ground-truth frequency of a taxonomy label at threshold `k`
/// given its rule and the worker noise.
pub fn planted_ground_truth_rate(rule: &PlantedRule, noise: f64, k: Threshold) -> f64 {
    let n = ANNOTATIONS_PER_RECORD as u32;
    let k = u32::from(k.get());
    let latent = rule.latent_rate();
    latent * binomial_tail(n, 1.0 - noise, k) + (1.0 - latent) * binomial_tail(n, noise, k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedLabelTruth {
    pub label: ReasonLabel,
    pub rule: Option<PlantedRule>,
    /// Expected latent frequency; `None` for OTH, whose rate depends on the others.
    pub planted_latent_rate: Option<f64>,
    pub realized_latent_rate: f64,
    /// Expected ground-truth frequency at k = 1..=5.
    pub planted_ground_truth_rate: Option<[f64; 5]>,
    /// Realized ground-truth frequency at k = 1..=5.
    pub realized_ground_truth_rate: [f64; 5],
}

/// Everything needed to check the statistics a fixture claims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub spec: SynthSpec,
    pub condition_rates: BTreeMap<String, f64>,
    pub labels: Vec<PlantedLabelTruth>,
    /// Latent reason set of each record, by record id.
    pub latent: BTreeMap<String, Vec<ReasonLabel>>,
}

#[derive(Debug, Clone)]
pub struct SynthFixture {
    pub records: Vec<VisualQuestionRecord>,
    pub image_features: BTreeMap<String, ImageFeatures>,
    pub truth: SynthTruth,
}

impl SynthFixture {
    /// Writes `records.jsonl`, `image_features.jsonl` and `truth.json`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_records(dir.join("records.jsonl"), &self.records)?;
        write_image_features(dir.join("image_features.jsonl"), &self.image_features)?;
        let path = dir.join("truth.json");
        let mut text = serde_json::to_string_pretty(&self.truth).expect("in-memory serialization");
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    }
}

const FILLER: &[&str] = &[
    "the", "this", "on", "in", "of", "item", "object", "thing", "left", "right", "front", "back",
    "near", "small", "large", "picture", "photo", "shown", "here", "there", "table", "box",
];
const OBJECTS: &[&str] = &[
    "pillow", "blanket", "soup can", "remote control", "coffee mug", "laptop", "cereal box",
    "bottle", "shirt", "dog", "street sign", "keyboard", "book", "phone", "money",
];
const COLORS: &[&str] = &[
    "red", "blue", "dark blue", "light green", "green", "white", "off white", "black", "grey",
    "navy", "yellow", "brown",
];

fn question_text(rng: &mut ChaCha8Rng, words: usize, color: bool) -> String {
    let lead: &[&str] = if color {
        &["What", "color", "is"]
    } else {
        &["What", "is", "this"]
    };
    let mut out: Vec<&str> = lead.to_vec();
    while out.len() < words {
        out.push(FILLER.choose(rng).expect("non-empty"));
    }
    let mut q = out.join(" ");
    q.push('?');
    q
}

fn answer_text(rng: &mut ChaCha8Rng, color: bool, unanswerable: bool) -> String {
    if unanswerable && rng.gen_bool(UNANSWERABLE_RATE) {
        return "unanswerable".into();
    }
    let pool = if color { COLORS } else { OBJECTS };
    pool.choose(rng).expect("non-empty").to_string()
}

pub fn generate(spec: &SynthSpec) -> Result<SynthFixture> {
    if spec.n < MIN_SYNTH_RECORDS {
        return Err(Error::InvalidArgument(format!(
            "synthetic fixtures need at least {MIN_SYNTH_RECORDS} records, got {}",
            spec.n
        )));
    }
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(Error::InvalidArgument(format!("noise must be in [0, 1], got {}", spec.noise)));
    }
    if spec.n_workers < ANNOTATIONS_PER_RECORD {
        return Err(Error::InvalidArgument(format!(
            "need at least {ANNOTATIONS_PER_RECORD} workers, got {}",
            spec.n_workers
        )));
    }
    let rules = planted_rules();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let workers: Vec<String> = (0..spec.n_workers).map(|i| format!("worker{i:03}")).collect();
    let width = (spec.n - 1).to_string().len();

    let mut records = Vec::with_capacity(spec.n);
    let mut image_features = BTreeMap::new();
    let mut latent_sets = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let words = rng.gen_range(QUESTION_WORDS);
        let tags = rng.gen_range(0..=MAX_TAGS);
        let color = rng.gen_bool(COLOR_QUESTION_RATE);
        let holds = |c: Condition| match c {
            Condition::LongQuestion => words >= LONG_QUESTION_MIN_WORDS,
            Condition::FewTags => tags < FEW_TAGS_BELOW,
            Condition::ColorQuestion => color,
            Condition::Always => true,
        };

        let mut latent = LabelSet::empty();
        for rule in &rules {
            let p = if holds(rule.condition) {
                rule.p_if_true
            } else {
                rule.p_if_false
            };
            if rng.gen_bool(p) {
                latent.insert(rule.label);
            }
        }
        if rng.gen_bool(OTHER_RATE) || latent.is_empty() {
            latent.insert(ReasonLabel::Oth);
        }

        let image = ImageFeatures {
            num_categories: rng.gen_range(0..=5),
            num_tags: tags,
            num_colors: rng.gen_range(1..=8),
            num_faces: rng.gen_range(0..=3),
        };
        let question = question_text(&mut rng, words, color);
        let unanswerable = latent.contains(ReasonLabel::Lqi) || latent.contains(ReasonLabel::Ive);
        let answers: Vec<String> = (0..ANSWERS_PER_RECORD)
            .map(|_| answer_text(&mut rng, color, unanswerable))
            .collect();

        let annotations = sample(&mut rng, workers.len(), ANNOTATIONS_PER_RECORD)
            .into_iter()
            .map(|w| {
                let mut labels = LabelSet::empty();
                for label in ReasonLabel::ALL {
                    if latent.contains(label) != rng.gen_bool(spec.noise) {
                        labels.insert(label);
                    }
                }
                if labels.is_empty() {
                    labels.insert(ReasonLabel::Oth);
                }
                WorkerAnnotation {
                    worker_id: workers[w].clone(),
                    labels,
                }
            })
            .collect();

        let id = format!("synth-{i:0width$}");
        let image_id = format!("img-{i:0width$}");
        image_features.insert(image_id.clone(), image);
        records.push(VisualQuestionRecord {
            id,
            dataset: "synth".into(),
            question,
            image_id,
            answers,
            annotations,
        });
        latent_sets.push(latent);
    }

    let n = spec.n as f64;
    let per_k: Vec<[f64; NUM_LABELS]> = Threshold::all()
        .map(|k| {
            let g: Vec<_> = records
                .iter()
                .map(|r| aggregate_ground_truth(&r.annotations, k))
                .collect();
            label_frequency(&g).expect("n >= 20")
        })
        .collect();
    let labels = ReasonLabel::ALL
        .into_iter()
        .map(|label| {
            let rule = rules.iter().find(|r| r.label == label).copied();
            let realized_latent =
                latent_sets.iter().filter(|s| s.contains(label)).count() as f64 / n;
            PlantedLabelTruth {
                label,
                rule,
                planted_latent_rate: rule.map(|r| r.latent_rate()),
                realized_latent_rate: realized_latent,
                planted_ground_truth_rate: rule.map(|r| {
                    let ks: Vec<_> = Threshold::all().collect();
                    std::array::from_fn(|i| planted_ground_truth_rate(&r, spec.noise, ks[i]))
                }),
                realized_ground_truth_rate: std::array::from_fn(|i| per_k[i][label.index()]),
            }
        })
        .collect();
    let condition_rates = [
        ("long_question", Condition::LongQuestion),
        ("few_tags", Condition::FewTags),
        ("color_question", Condition::ColorQuestion),
    ]
    .into_iter()
    .map(|(name, c)| (name.to_string(), c.rate()))
    .collect();
    let latent = records
        .iter()
        .zip(&latent_sets)
        .map(|(r, s)| (r.id.clone(), s.iter().collect()))
        .collect();

    Ok(SynthFixture {
        records,
        image_features,
        truth: SynthTruth {
            spec: spec.clone(),
            condition_rates,
            labels,
            latent,
        },
    })
}
