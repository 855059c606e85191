use std::fs::{self, File};
use std::path::{Path, PathBuf};

use serde::Serialize;
use whydiffer::ReasonLabel;

use crate::failure::Failure;

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))
}

pub fn csv_writer(dir: &Path, name: &str) -> Result<(csv::Writer<File>, PathBuf), Failure> {
    let path = dir.join(name);
    let writer = csv::Writer::from_path(&path).map_err(|e| Failure::setup(format!("{}: {e}", path.display())))?;
    Ok((writer, path))
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::setup(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
    Ok(path)
}

pub fn num(v: f64) -> String {
    v.to_string()
}

/// Undefined statistics are written as `NA`.
pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), num)
}

pub fn label_codes() -> impl Iterator<Item = &'static str> {
    ReasonLabel::ALL.into_iter().map(ReasonLabel::code)
}
