//! CSV tables, checks and the run manifest.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
}

impl Cell {
    /// Floats use Rust's shortest round-trip representation.
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format!("{v:?}"),
            Cell::I(v) => v.to_string(),
            Cell::B(v) => (*v as u8).to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem; the table is written to `<name>.csv`.
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| *h == name)?;
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::F(v) => Some(*v),
                Cell::I(v) => Some(*v as f64),
                Cell::B(v) => Some(*v as u8 as f64),
                Cell::S(_) => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable condition, for example "<= 1e-8".
    pub condition: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, condition: format!("<= {limit:e}"), passed: value <= limit }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, condition: format!(">= {limit:e}"), passed: value >= limit }
    }

    pub fn holds(name: &str, value: f64, condition: &str, passed: bool) -> Self {
        Self { name: name.into(), value, condition: condition.into(), passed }
    }
}

/// What a scenario produces before anything touches the disk.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Grid sizes, tolerances and other run metadata reported in the manifest.
    pub metadata: Vec<(String, serde_json::Value)>,
}

impl Outcome {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn meta<T: Serialize>(&mut self, key: &str, value: T) {
        self.metadata.push((key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null)));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub seed: u64,
    pub units: serde_json::Value,
    pub threads: usize,
    pub config: ScenarioConfig,
    pub metadata: serde_json::Map<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub files: Vec<FileEntry>,
    pub error: Option<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn write_tables(dir: &Path, tables: &[Table]) -> io::Result<Vec<FileEntry>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(tables.len());
    for t in tables {
        let name = format!("{}.csv", t.name);
        let body = t.to_csv();
        write_atomic(&dir.join(&name), body.as_bytes())?;
        files.push(FileEntry { name, bytes: body.len(), sha256: sha256_hex(body.as_bytes()) });
    }
    Ok(files)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> io::Result<()> {
    let mut json = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    json.push('\n');
    write_atomic(&dir.join("manifest.json"), json.as_bytes())
}
