use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::Method;
use crate::pipeline::{Direction, Technique};
use crate::regression::{check_major, ModelKind};

use super::experiment::CellKey;

pub const REPORT_FORMAT_VERSION: &str = "1.0";

pub const REPORT_CSV_HEADER: [&str; 10] = [
    "technique",
    "direction",
    "method",
    "model",
    "scheme",
    "r2",
    "mae_s",
    "mape_pct",
    "n_train",
    "n_test",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub r2: Option<f64>,
    pub mae_s: f64,
    pub mape_pct: f64,
    pub n_train: usize,
    pub n_test: usize,
}

/// One row of the report. Metric fields are `None` when the cell was
/// skipped; `r2` alone is `None` when the test targets had no variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub technique: Technique,
    pub direction: Direction,
    pub method: Method,
    pub model: ModelKind,
    pub scheme: String,
    pub r2: Option<f64>,
    pub mae_s: Option<f64>,
    pub mape_pct: Option<f64>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<FoldResult>,
}

impl CellResult {
    pub(crate) fn empty(key: &CellKey) -> Self {
        Self {
            technique: key.technique,
            direction: key.direction,
            method: key.method,
            model: key.model,
            scheme: key.scheme.label(),
            r2: None,
            mae_s: None,
            mape_pct: None,
            n_train: None,
            n_test: None,
            skipped: None,
            folds: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format_version: String,
    /// Absent when the report was read back from CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub cells: Vec<CellResult>,
}

fn fixed(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn count(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EvaluationReport {
    /// One line per cell, six decimals, LF endings. Skipped cells leave the
    /// metric and size fields empty; an undefined R² prints as `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = REPORT_CSV_HEADER.join(",");
        out.push('\n');
        for c in &self.cells {
            let r2 = match (c.skipped.is_some(), c.r2) {
                (true, _) => String::new(),
                (false, None) => "NA".into(),
                (false, r) => fixed(r),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                c.technique,
                c.direction,
                c.method,
                c.model,
                c.scheme,
                r2,
                fixed(c.mae_s),
                fixed(c.mape_pct),
                count(c.n_train),
                count(c.n_test)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        if header.iter().ne(REPORT_CSV_HEADER) {
            return Err(Error::SchemaMismatch(format!(
                "report header `{}` does not match `{}`",
                header.iter().collect::<Vec<_>>().join(","),
                REPORT_CSV_HEADER.join(",")
            )));
        }
        let mut cells = Vec::new();
        for row in reader.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let bad = |message: String| Error::Parse { line, message };
            if row.len() != REPORT_CSV_HEADER.len() {
                return Err(bad(format!("expected {} fields, got {}", REPORT_CSV_HEADER.len(), row.len())));
            }
            let float = |i: usize| -> Result<Option<f64>> {
                match &row[i] {
                    "" => Ok(None),
                    s => s
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Some)
                        .ok_or_else(|| bad(format!("`{}` is not a number: `{s}`", REPORT_CSV_HEADER[i]))),
                }
            };
            let int = |i: usize| -> Result<Option<usize>> {
                match &row[i] {
                    "" => Ok(None),
                    s => s
                        .parse()
                        .map(Some)
                        .map_err(|_| bad(format!("`{}` is not a count: `{s}`", REPORT_CSV_HEADER[i]))),
                }
            };
            let skipped = row[6].is_empty();
            let r2 = if &row[5] == "NA" { None } else { float(5)? };
            cells.push(CellResult {
                technique: row[0].parse().map_err(|e: Error| bad(e.to_string()))?,
                direction: row[1].parse().map_err(|e: Error| bad(e.to_string()))?,
                method: row[2].parse().map_err(|e: Error| bad(e.to_string()))?,
                model: row[3].parse().map_err(|e: Error| bad(e.to_string()))?,
                scheme: row[4].to_owned(),
                r2,
                mae_s: float(6)?,
                mape_pct: float(7)?,
                n_train: int(8)?,
                n_test: int(9)?,
                skipped: skipped.then(|| "skipped".to_owned()),
                folds: Vec::new(),
            });
        }
        Ok(Self {
            format_version: REPORT_FORMAT_VERSION.into(),
            seed: None,
            cells,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        check_major(&r.format_version, REPORT_FORMAT_VERSION)?;
        Ok(r)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("| {} |\n|{}\n", REPORT_CSV_HEADER.join(" | "), "---|".repeat(REPORT_CSV_HEADER.len()));
        for c in &self.cells {
            let r2 = match (c.skipped.is_some(), c.r2) {
                (true, _) => "skipped".to_owned(),
                (false, None) => "NA".to_owned(),
                (false, Some(v)) => format!("{v:.4}"),
            };
            let f4 = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                c.technique,
                c.direction,
                c.method,
                c.model,
                c.scheme,
                r2,
                f4(c.mae_s),
                f4(c.mape_pct),
                count(c.n_train),
                count(c.n_test)
            );
        }
        out
    }
}
