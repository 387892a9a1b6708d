//! Run reports, CSV ingestion, SVG plots and run configuration.
//!
//! Reports are written in a canonical JSON form: object keys sorted, reals
//! printed with 17 significant digits, two-space indentation and a trailing
//! newline. Parsing a report and writing it again reproduces the same bytes.

pub mod config;
mod csv_io;
mod plot;

pub use crate::stats::{pearson, CorrelationReport};
pub use csv_io::{load_labeled_csv, load_matrix_csv, load_paired_csv, load_series_csv, write_labeled_csv};
pub use plot::{emit_line_plot, render_line_plot, PlotSpec, Series};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::types::ValidationError;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: no `label` column in the header")]
    MissingLabelColumn { path: PathBuf },
    #[error("{path}: data row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: cell {value:?} at data row {row}, column `{column}` is not a number")]
    NonNumericCell {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path}: no data rows")]
    EmptyFile { path: PathBuf },
    #[error("x file has {x} rows but y file has {y}")]
    RowCountMismatch { x: usize, y: usize },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("plot needs at least one series of two or more finite points")]
    EmptySeries,
    #[error("invalid report: {0}")]
    Json(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

impl ReportError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Everything needed to reproduce a run, plus its results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub results: Value,
    /// Only filled when timing is requested; it is the one field that
    /// differs between otherwise identical runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, config: Value, seed: u64, results: Value) -> Self {
        Self {
            command: command.into(),
            config,
            seed,
            results,
            wall_time_s: None,
        }
    }

    pub fn to_canonical_string(&self) -> Result<String, ReportError> {
        let v = serde_json::to_value(self).map_err(|e| ReportError::Json(e.to_string()))?;
        Ok(canonical_json(&v))
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::Json(e.to_string()))
    }
}

/// Writes `report` to `path` in canonical form.
pub fn emit_report(report: &RunReport, path: &Path) -> Result<(), ReportError> {
    std::fs::write(path, report.to_canonical_string()?).map_err(|e| ReportError::io(path, e))
}

/// A real with 17 significant digits; integers stay integers.
fn number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        let f = n.as_f64().expect("f64 number");
        format!("{f:.16e}")
    } else {
        n.to_string()
    }
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Canonical text of a JSON value. Keys come out sorted because
/// `serde_json::Map` is ordered.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&string(s)),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, depth);
            }
            out.push(']');
        }
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(o) if o.is_empty() => out.push_str("{}"),
        Value::Object(o) => {
            out.push_str("{\n");
            for (i, (k, x)) in o.iter().enumerate() {
                pad(out, depth + 1);
                let _ = write!(out, "{}: ", string(k));
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> RunReport {
        RunReport::new(
            "bounds",
            json!({"z": 1, "a": [0.1, 2.0, -3.5e-12], "m": {"k": "v\"q"}}),
            42,
            json!({"bits": 0.531_004_406_410_718_8, "rows": [{"b": 1.0, "a": null}], "ok": true}),
        )
    }

    #[test]
    fn canonical_round_trip() {
        let text = sample().to_canonical_string().unwrap();
        assert!(text.ends_with('\n'));
        assert!(text.contains("\"bits\": 5.31004406410718"));
        let again = RunReport::from_json(&text).unwrap();
        assert_eq!(again.seed, 42);
        assert_eq!(again.to_canonical_string().unwrap(), text);
        let a = text.find("\"command\"").unwrap();
        let c = text.find("\"config\"").unwrap();
        let s = text.find("\"seed\"").unwrap();
        assert!(a < c && c < s);
    }

    #[test]
    fn awkward_floats_round_trip() {
        let vals = [f64::MIN_POSITIVE, 1e300, 0.1 + 0.2, -0.0, 123_456_789.123_456_78, 5e-324];
        let r = RunReport::new("x", json!(null), 0, json!(vals));
        let text = r.to_canonical_string().unwrap();
        let back = RunReport::from_json(&text).unwrap();
        let got: Vec<f64> = serde_json::from_value(back.results.clone()).unwrap();
        for (a, b) in vals.iter().zip(&got) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.to_canonical_string().unwrap(), text);
    }

    #[test]
    fn emit_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        emit_report(&sample(), &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, sample().to_canonical_string().unwrap());
        assert!(matches!(
            emit_report(&sample(), &dir.path().join("missing/r.json")),
            Err(ReportError::Io { .. })
        ));
    }
}
