//! Configuration parsing, command execution and report serialization for the
//! `bsenclose` tool.
//!
//! A run reads a [`RunConfig`], executes one command and produces a
//! [`Report`]: a canonical JSON document plus optional CSV siblings for bulk
//! data. Reports contain no wall-clock times or absolute paths, so the same
//! config and seed always give the same bytes.

mod commands;
mod config;

pub use commands::run;
pub use config::{
    from_value, parse_config, BenchSection, Command, ConfigError, ConfigErrors, EstimateSelection, Format,
    PotentialConfig, RunConfig, ScanConfig, WeightConfig, WeightKind, MAX_SEED,
};

use serde_json::Value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("computation failed: {0}")]
    Computation(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) => ExitStatus::ValidationError.code(),
            CliError::Computation(_) | CliError::Io { .. } => ExitStatus::ComputationalError.code(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    ValidationError,
    ComputationalError,
    /// No certificate could be issued, or a bench estimate exceeded its constant.
    Inconclusive,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::ValidationError => 1,
            ExitStatus::ComputationalError => 2,
            ExitStatus::Inconclusive => 3,
        }
    }
}

/// A bulk-data file written next to the JSON report.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvFile {
    /// Suffix after the report stem, e.g. `scan.csv`.
    pub suffix: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: Command,
    /// Echo of the resolved config.
    pub config: Value,
    pub results: Value,
    /// Work counters; deterministic, unlike wall time.
    pub timing: Value,
    pub warnings: Vec<String>,
    pub csv: Vec<CsvFile>,
    pub status: ExitStatus,
}

impl Report {
    /// File name of a CSV sibling for a report written to `out`.
    pub fn csv_name(out: Option<&Path>, suffix: &str) -> String {
        let stem = out.and_then(|p| p.file_stem()).and_then(|s| s.to_str()).unwrap_or("report");
        format!("{stem}.{suffix}")
    }

    /// Canonical JSON: sorted keys, two-space indent, result floats with 12
    /// significant digits, config floats in shortest round-trip form. CSV
    /// siblings are referenced by file name relative to `out`.
    pub fn to_json(&self, out: Option<&Path>) -> String {
        let files: Vec<Value> = if out.is_some() {
            self.csv.iter().map(|c| Value::String(Report::csv_name(out, &c.suffix))).collect()
        } else {
            vec![]
        };
        let mut doc = serde_json::Map::new();
        doc.insert("schema_version".into(), SCHEMA_VERSION.into());
        doc.insert("command".into(), self.command.id().into());
        doc.insert("results".into(), self.results.clone());
        doc.insert("timing".into(), self.timing.clone());
        doc.insert("warnings".into(), self.warnings.iter().map(|w| Value::String(w.clone())).collect());
        doc.insert("files".into(), Value::Array(files));
        doc.insert("status".into(), self.status.code().into());
        doc.insert("config".into(), self.config.clone());
        let mut s = String::new();
        write_canonical(&mut s, &Value::Object(doc), 0, true);
        s.push('\n');
        s
    }

    /// Writes the report to `out` and its CSV siblings beside it, or the JSON
    /// alone to stdout when `out` is `None`.
    pub fn write(&self, out: Option<&Path>) -> Result<(), CliError> {
        let json = self.to_json(out);
        let Some(out) = out else {
            print!("{json}");
            return Ok(());
        };
        let io = |p: &Path, e: std::io::Error| CliError::Io { path: p.to_path_buf(), message: e.to_string() };
        let dir = out.parent().filter(|d| !d.as_os_str().is_empty());
        if let Some(d) = dir {
            std::fs::create_dir_all(d).map_err(|e| io(d, e))?;
        }
        for c in &self.csv {
            let name = Report::csv_name(Some(out), &c.suffix);
            let p = dir.map_or_else(|| PathBuf::from(&name), |d| d.join(&name));
            std::fs::write(&p, &c.contents).map_err(|e| io(&p, e))?;
        }
        std::fs::write(out, json).map_err(|e| io(out, e))
    }
}

/// Result float format: 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Floats are fixed-format when `fixed`; the top-level `config` subtree is
/// printed in shortest form so that it parses back exactly.
fn write_canonical(s: &mut String, v: &Value, depth: usize, fixed: bool) {
    let pad = |s: &mut String, d: usize| (0..d).for_each(|_| s.push_str("  "));
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => s.push_str(&v.to_string()),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() && fixed => s.push_str(&fmt_float(x)),
            _ => s.push_str(&n.to_string()),
        },
        Value::Array(a) if a.is_empty() => s.push_str("[]"),
        Value::Array(a) => {
            s.push('[');
            for (i, x) in a.iter().enumerate() {
                s.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(s, depth + 1);
                write_canonical(s, x, depth + 1, fixed);
            }
            s.push('\n');
            pad(s, depth);
            s.push(']');
        }
        Value::Object(m) if m.is_empty() => s.push_str("{}"),
        Value::Object(m) => {
            // serde_json maps are ordered by key.
            s.push('{');
            for (i, (k, x)) in m.iter().enumerate() {
                s.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(s, depth + 1);
                let _ = write!(s, "{}: ", Value::String(k.clone()));
                write_canonical(s, x, depth + 1, fixed && !(depth == 0 && k == "config"));
            }
            s.push('\n');
            pad(s, depth);
            s.push('}');
        }
    }
}
