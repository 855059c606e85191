//! JSONL loaders for records, image-feature sidecars, split manifests and
//! relevance scores, plus seeded train/validation/test splitting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{validate_record, RawRecord, Violation, VisualQuestionRecord};

/// Non-empty lines of a JSONL file with their 1-based line numbers.
fn jsonl_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.to_string()))
        .collect())
}

fn parse_line<T: for<'de> Deserialize<'de>>(path: &Path, line: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    })
}

/// What went wrong on one line of a records file.
#[derive(Debug, Clone, PartialEq)]
pub enum LineIssueKind {
    Malformed(String),
    DuplicateId(String),
    Invalid(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineIssue {
    pub line: usize,
    pub kind: LineIssueKind,
}

impl fmt::Display for LineIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LineIssueKind::Malformed(msg) => write!(f, "line {}: {msg}", self.line),
            LineIssueKind::DuplicateId(id) => write!(f, "line {}: duplicate id '{id}'", self.line),
            LineIssueKind::Invalid(vs) => {
                let joined: Vec<_> = vs.iter().map(ToString::to_string).collect();
                write!(f, "line {}: {}", self.line, joined.join("; "))
            }
        }
    }
}

/// Result of reading a records file: good records plus every per-line issue.
#[derive(Debug, Clone, Default)]
pub struct RecordScan {
    pub records: Vec<VisualQuestionRecord>,
    pub issues: Vec<LineIssue>,
}

/// Reads every line of a records file, collecting valid records and issues
/// without stopping at the first problem.
pub fn scan_records(path: impl AsRef<Path>) -> Result<RecordScan> {
    let path = path.as_ref();
    let mut scan = RecordScan::default();
    let mut ids = HashSet::new();
    for (line, text) in jsonl_lines(path)? {
        let raw: RawRecord = match serde_json::from_str(&text) {
            Ok(r) => r,
            Err(e) => {
                scan.issues.push(LineIssue {
                    line,
                    kind: LineIssueKind::Malformed(e.to_string()),
                });
                continue;
            }
        };
        let violations = validate_record(&raw);
        if !violations.is_empty() {
            scan.issues.push(LineIssue {
                line,
                kind: LineIssueKind::Invalid(violations),
            });
            continue;
        }
        if !ids.insert(raw.id.clone()) {
            scan.issues.push(LineIssue {
                line,
                kind: LineIssueKind::DuplicateId(raw.id),
            });
            continue;
        }
        scan.records
            .push(VisualQuestionRecord::try_from(raw).expect("validated above"));
    }
    Ok(scan)
}

#[derive(Debug, Clone)]
pub struct LoadedRecords {
    pub records: Vec<VisualQuestionRecord>,
    /// Lines skipped in lenient mode.
    pub skipped: usize,
}

/// Loads a records file. Strict mode fails on the first offending line;
/// lenient mode skips bad lines and counts them.
pub fn load_records(path: impl AsRef<Path>, lenient: bool) -> Result<LoadedRecords> {
    let path = path.as_ref();
    let scan = scan_records(path)?;
    if !lenient {
        if let Some(issue) = scan.issues.into_iter().next() {
            let path = path.to_path_buf();
            let line = issue.line;
            return Err(match issue.kind {
                LineIssueKind::Malformed(message) => Error::Parse { path, line, message },
                LineIssueKind::DuplicateId(id) => Error::DuplicateId { path, line, id },
                LineIssueKind::Invalid(violations) => Error::InvalidRecord {
                    path,
                    line,
                    violations,
                },
            });
        }
        return Ok(LoadedRecords {
            records: scan.records,
            skipped: 0,
        });
    }
    Ok(LoadedRecords {
        skipped: scan.issues.len(),
        records: scan.records,
    })
}

/// Writes records as JSONL, one per line, with a trailing newline.
pub fn write_records(path: impl AsRef<Path>, records: &[VisualQuestionRecord]) -> Result<()> {
    write_jsonl(path.as_ref(), records)
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("in-memory serialization");
        out.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))
}

/// Per-image counts from a vision service, supplied as a sidecar file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ImageFeatures {
    pub num_categories: u32,
    pub num_tags: u32,
    pub num_colors: u32,
    pub num_faces: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageFeaturesLine {
    image_id: String,
    num_categories: i64,
    num_tags: i64,
    num_colors: i64,
    num_faces: i64,
}

pub fn load_image_features(path: impl AsRef<Path>) -> Result<BTreeMap<String, ImageFeatures>> {
    let path = path.as_ref();
    let mut map = BTreeMap::new();
    for (line, text) in jsonl_lines(path)? {
        let row: ImageFeaturesLine = parse_line(path, line, &text)?;
        let count = |name: &str, v: i64| -> Result<u32> {
            u32::try_from(v).map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("{name} must be a non-negative count, got {v}"),
            })
        };
        let features = ImageFeatures {
            num_categories: count("num_categories", row.num_categories)?,
            num_tags: count("num_tags", row.num_tags)?,
            num_colors: count("num_colors", row.num_colors)?,
            num_faces: count("num_faces", row.num_faces)?,
        };
        if map.insert(row.image_id.clone(), features).is_some() {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                line,
                id: row.image_id,
            });
        }
    }
    Ok(map)
}

pub fn write_image_features(
    path: impl AsRef<Path>,
    features: &BTreeMap<String, ImageFeatures>,
) -> Result<()> {
    let rows: Vec<_> = features
        .iter()
        .map(|(id, f)| ImageFeaturesLine {
            image_id: id.clone(),
            num_categories: f.num_categories.into(),
            num_tags: f.num_tags.into(),
            num_colors: f.num_colors.into(),
            num_faces: f.num_faces.into(),
        })
        .collect();
    write_jsonl(path.as_ref(), &rows)
}

/// Image features aligned with `records`. Records whose image has no sidecar
/// entry get all-zero counts; the second value is how many were imputed.
pub fn image_features_for(
    records: &[VisualQuestionRecord],
    sidecar: &BTreeMap<String, ImageFeatures>,
) -> (Vec<ImageFeatures>, usize) {
    let mut missing = 0;
    let features = records
        .iter()
        .map(|r| {
            sidecar.get(&r.image_id).copied().unwrap_or_else(|| {
                missing += 1;
                ImageFeatures::default()
            })
        })
        .collect();
    (features, missing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split {
    #[serde(rename = "train")]
    Train,
    #[serde(rename = "val")]
    Validation,
    #[serde(rename = "test")]
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!(
                "unknown split '{other}' (expected train, val or test)"
            ))),
        }
    }
}

/// Record id to split, covering every record exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SplitAssignment(pub BTreeMap<String, Split>);

impl SplitAssignment {
    pub fn get(&self, id: &str) -> Option<Split> {
        self.0.get(id).copied()
    }

    pub fn count(&self, split: Split) -> usize {
        self.0.values().filter(|&&s| s == split).count()
    }

    pub fn ids(&self, split: Split) -> impl Iterator<Item = &str> {
        self.0
            .iter()
            .filter(move |(_, &s)| s == split)
            .map(|(id, _)| id.as_str())
    }

    pub fn write_manifest(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows: Vec<_> = self
            .0
            .iter()
            .map(|(id, &split)| ManifestLine {
                id: id.clone(),
                split,
            })
            .collect();
        write_jsonl(path.as_ref(), &rows)
    }
}

/// Train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitProportions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitProportions {
    fn default() -> Self {
        SplitProportions {
            train: 0.65,
            val: 0.10,
            test: 0.25,
        }
    }
}

impl SplitProportions {
    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "split proportions must be positive, got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split proportions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    /// Split sizes for `n` records: floor of n·p each, then the remainder one
    /// at a time to train, val, test.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        // Slack absorbs products like 100 × 0.29 landing a hair under 29.
        let floor = |p: f64| ((n as f64) * p + 1e-9).floor() as usize;
        let mut sizes = [floor(self.train), floor(self.val), floor(self.test)];
        let total: usize = sizes.iter().sum();
        let mut remainder = n.saturating_sub(total);
        let mut slot = 0;
        while remainder > 0 {
            sizes[slot % 3] += 1;
            remainder -= 1;
            slot += 1;
        }
        sizes
    }
}

/// Deterministic split: sort ids, Fisher–Yates shuffle with a ChaCha8 stream
/// seeded from `seed`, then cut the shuffled list into train, val, test.
pub fn generate_split(
    record_ids: &[String],
    proportions: SplitProportions,
    seed: u64,
) -> Result<SplitAssignment> {
    proportions.validate()?;
    if record_ids.is_empty() {
        return Err(Error::Empty("record id list"));
    }
    let mut ids: Vec<&String> = record_ids.iter().collect();
    ids.sort();
    ids.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let [n_train, n_val, _] = proportions.sizes(ids.len());
    let map = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let split = if i < n_train {
                Split::Train
            } else if i < n_train + n_val {
                Split::Validation
            } else {
                Split::Test
            };
            (id.clone(), split)
        })
        .collect();
    Ok(SplitAssignment(map))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestLine {
    id: String,
    split: Split,
}

/// Loads a split manifest that must cover `record_ids` exactly.
pub fn load_split_manifest(path: impl AsRef<Path>, record_ids: &[String]) -> Result<SplitAssignment> {
    let path = path.as_ref();
    let known: HashSet<&str> = record_ids.iter().map(String::as_str).collect();
    let mut map = BTreeMap::new();
    for (line, text) in jsonl_lines(path)? {
        let row: ManifestLine = parse_line(path, line, &text)?;
        if !known.contains(row.id.as_str()) {
            return Err(Error::UnknownRecordId(row.id));
        }
        if map.insert(row.id.clone(), row.split).is_some() {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                line,
                id: row.id,
            });
        }
    }
    if let Some(missing) = record_ids.iter().find(|id| !map.contains_key(*id)) {
        return Err(Error::MissingFromManifest(missing.clone()));
    }
    Ok(SplitAssignment(map))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelevanceLine {
    id: String,
    relevance: f64,
}

/// Loads externally computed question-image relevance probabilities.
pub fn load_relevance(path: impl AsRef<Path>) -> Result<BTreeMap<String, f64>> {
    let path = path.as_ref();
    let mut map = BTreeMap::new();
    for (line, text) in jsonl_lines(path)? {
        let row: RelevanceLine = parse_line(path, line, &text)?;
        if !(0.0..=1.0).contains(&row.relevance) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("relevance must be in [0, 1], got {}", row.relevance),
            });
        }
        if map.insert(row.id.clone(), row.relevance).is_some() {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                line,
                id: row.id,
            });
        }
    }
    Ok(map)
}
