use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::Format;

pub const SCHEMA_VERSION: u32 = 1;

/// One long-form result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub run_id: String,
    pub system: String,
    #[serde(rename = "C")]
    pub c: f64,
    pub map: String,
    pub stat: String,
    pub value: f64,
}

#[derive(Serialize, Deserialize)]
struct RecordsDoc {
    schema_version: u32,
    records: Vec<Record>,
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, e.into())
}

/// Writes `records` as `<stem>.csv` or `<stem>.json` under `dir`.
pub fn write_records(
    dir: &Path,
    stem: &str,
    records: &[Record],
    format: Format,
) -> Result<PathBuf> {
    match format {
        Format::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
            for r in records {
                w.serialize(r).map_err(|e| csv_err(&path, e))?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            Ok(path)
        }
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            let doc = RecordsDoc {
                schema_version: SCHEMA_VERSION,
                records: records.to_vec(),
            };
            write_json(&path, &doc)?;
            Ok(path)
        }
    }
}

pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: RecordsDoc = serde_json::from_str(&text)?;
        return Ok(doc.records);
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Status of one grid cell in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellEntry {
    pub c_index: usize,
    #[serde(rename = "C")]
    pub c: f64,
    /// Seed per map or method label, as used by the cell.
    pub seeds: Vec<(String, u64)>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<CellEntry>,
}
