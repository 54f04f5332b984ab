//! Reading pilot datasets from delimited text.
//!
//! Accepted input:
//!
//! * UTF-8, optional byte-order mark, first record is the header;
//! * configurable delimiter (comma by default) and column names (`label`,
//!   `pred_a`, `pred_b` by default), matched after trimming whitespace; other
//!   columns are ignored;
//! * labels `1`/`0` or `true`/`false` in any letter case;
//! * predictions are finite decimal numbers with `.` as the decimal point
//!   (exponents allowed). `NaN`, `inf` and comma decimals are rejected.
//!
//! Every bad row is an error by default. In lenient mode bad rows are skipped
//! and listed in the summary instead. Line numbers count the header as
//! line 1.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pilot::PilotDataset;
use crate::roc::{auroc_with_ci, AurocEstimate};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read pilot file: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed CSV near line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("column names must be distinct (got {0:?} twice)")]
    DuplicateColumnName(String),

    #[error("header has no column named {0:?}")]
    MissingColumn(String),

    #[error("line {line}: label {value:?} is not one of 0, 1, true, false")]
    BadLabel { line: u64, value: String },

    #[error("line {line}: column {column:?} value {value:?} is not a finite number")]
    BadNumber {
        line: u64,
        column: String,
        value: String,
    },

    #[error("no usable rows")]
    EmptyAfterParsing,

    #[error("all {n_rows} rows belong to one class; cases and controls are both required")]
    SingleClass { n_rows: usize },
}

impl IngestError {
    fn line(&self) -> Option<u64> {
        match self {
            Self::BadLabel { line, .. } | Self::BadNumber { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Where the three columns live and how strictly to read them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PilotFileSpec {
    pub label_column: String,
    pub score_a_column: String,
    pub score_b_column: String,
    pub delimiter: u8,
    /// Skip and report bad rows instead of failing.
    pub lenient: bool,
}

impl Default for PilotFileSpec {
    fn default() -> Self {
        Self {
            label_column: "label".into(),
            score_a_column: "pred_a".into(),
            score_b_column: "pred_b".into(),
            delimiter: b',',
            lenient: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotSummary {
    pub n_rows: usize,
    pub n_cases: usize,
    pub n_controls: usize,
    pub prevalence: f64,
    /// Absent when the pilot AUROC is exactly 0 or 1.
    pub auroc_a: Option<AurocEstimate>,
    pub auroc_b: Option<AurocEstimate>,
    /// SHA-256 of the canonical CSV rendering of the rows.
    pub sha256: String,
    pub rows_dropped: Vec<DroppedRow>,
    pub warnings: Vec<String>,
}

impl PilotSummary {
    pub fn new(pilot: &PilotDataset, rows_dropped: Vec<DroppedRow>) -> Self {
        let n_rows = pilot.len();
        let n_cases = pilot.n_cases();
        let outside = pilot
            .scores_a()
            .iter()
            .chain(pilot.scores_b())
            .filter(|s| !(0.0..=1.0).contains(*s))
            .count();
        let mut warnings = Vec::new();
        if outside > 0 {
            warnings.push(format!(
                "{outside} predictions fall outside [0, 1]; only their ranks are used"
            ));
        }
        Self {
            n_rows,
            n_cases,
            n_controls: n_rows - n_cases,
            prevalence: pilot.prevalence(),
            auroc_a: auroc_with_ci(pilot.labels(), pilot.scores_a()).ok(),
            auroc_b: auroc_with_ci(pilot.labels(), pilot.scores_b()).ok(),
            sha256: digest(pilot),
            rows_dropped,
            warnings,
        }
    }
}

/// Synthetic 400-row pilot set shipped with the tool for demos and tests.
pub const EXAMPLE_PILOT_CSV: &str = include_str!("../data/example_pilot.csv");

pub fn example_pilot() -> (PilotDataset, PilotSummary) {
    parse_pilot(EXAMPLE_PILOT_CSV.as_bytes(), &PilotFileSpec::default())
        .expect("bundled example parses")
}

fn parse_label(raw: &str) -> Option<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

fn parse_score(raw: &str) -> Option<f64> {
    // Rust's float grammar also accepts "inf"/"nan"; the finiteness check
    // rules those out.
    raw.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_pilot<R: Read>(
    reader: R,
    fspec: &PilotFileSpec,
) -> Result<(PilotDataset, PilotSummary), IngestError> {
    let names = [
        &fspec.label_column,
        &fspec.score_a_column,
        &fspec.score_b_column,
    ];
    for (i, a) in names.iter().enumerate() {
        if names[i + 1..].contains(a) {
            return Err(IngestError::DuplicateColumnName(a.to_string()));
        }
    }

    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(fspec.delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let csv_err = |e: csv::Error| IngestError::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };

    let headers = rdr.headers().map_err(csv_err)?.clone();
    let column = |name: &String| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.clone()))
    };
    let label_idx = column(&fspec.label_column)?;
    let a_idx = column(&fspec.score_a_column)?;
    let b_idx = column(&fspec.score_b_column)?;

    let mut labels = Vec::new();
    let mut scores_a = Vec::new();
    let mut scores_b = Vec::new();
    let mut dropped = Vec::new();

    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let cell = |i: usize| record.get(i).unwrap_or("");
        let row = (|| -> Result<(bool, f64, f64), IngestError> {
            let label = parse_label(cell(label_idx)).ok_or_else(|| IngestError::BadLabel {
                line,
                value: cell(label_idx).to_string(),
            })?;
            let score = |i: usize, name: &String| {
                parse_score(cell(i)).ok_or_else(|| IngestError::BadNumber {
                    line,
                    column: name.clone(),
                    value: cell(i).to_string(),
                })
            };
            Ok((
                label,
                score(a_idx, &fspec.score_a_column)?,
                score(b_idx, &fspec.score_b_column)?,
            ))
        })();
        match row {
            Ok((y, a, b)) => {
                labels.push(y);
                scores_a.push(a);
                scores_b.push(b);
            }
            Err(e) if fspec.lenient => dropped.push(DroppedRow {
                line: e.line().unwrap_or(line),
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }

    if labels.is_empty() {
        return Err(IngestError::EmptyAfterParsing);
    }
    let n_cases = labels.iter().filter(|&&y| y).count();
    if n_cases == 0 || n_cases == labels.len() {
        return Err(IngestError::SingleClass {
            n_rows: labels.len(),
        });
    }
    let pilot =
        PilotDataset::new(labels, scores_a, scores_b).expect("rows were validated while parsing");
    let summary = PilotSummary::new(&pilot, dropped);
    Ok((pilot, summary))
}

pub fn parse_pilot_file(
    path: impl AsRef<Path>,
    fspec: &PilotFileSpec,
) -> Result<(PilotDataset, PilotSummary), IngestError> {
    parse_pilot(File::open(path)?, fspec)
}

/// Writes the rows back out with the column names and delimiter of `fspec`.
/// Labels are written as `0`/`1` and predictions in shortest round-trip form.
pub fn write_pilot<W: Write>(
    pilot: &PilotDataset,
    writer: W,
    fspec: &PilotFileSpec,
) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(fspec.delimiter)
        .from_writer(writer);
    let to_err = |e: csv::Error| IngestError::Csv {
        line: 0,
        message: e.to_string(),
    };
    w.write_record([
        &fspec.label_column,
        &fspec.score_a_column,
        &fspec.score_b_column,
    ])
    .map_err(to_err)?;
    for ((y, a), b) in pilot
        .labels()
        .iter()
        .zip(pilot.scores_a())
        .zip(pilot.scores_b())
    {
        let label = if *y { "1" } else { "0" };
        w.write_record([label, &a.to_string(), &b.to_string()])
            .map_err(to_err)?;
    }
    w.flush()?;
    Ok(())
}

/// SHA-256 (lowercase hex) of the default-format CSV rendering, identifying
/// a pilot set independently of how it was supplied.
pub fn digest(pilot: &PilotDataset) -> String {
    let mut buf = Vec::new();
    write_pilot(pilot, &mut buf, &PilotFileSpec::default()).expect("writing to memory");
    Sha256::digest(&buf)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
