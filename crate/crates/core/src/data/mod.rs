//! Tabular data pipeline for two-cadence time series.
//!
//! Predictors arrive at a 30-minute cadence, the response at a 5-minute
//! cadence; [`align`] joins them by interval-averaging the response over
//! `[t, t+25]` minutes. [`screen_variables`] removes unusable columns and
//! incomplete rows before alignment, and [`split_by_date`] partitions by
//! calendar date with a closed-open convention. Every drop or rename is
//! recorded in a human-readable log carried alongside the data.

mod align;
mod ingest;

pub use align::{align, split_by_date};
pub use ingest::{parse_table, screen_variables};

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Interval;

/// Timestamp layout used for persisted datasets.
pub const DATASET_TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// A parsed cell of a raw input table.
#[derive(Clone, Debug, PartialEq)]
pub enum RawValue {
    Number(f64),
    /// Non-numeric content, kept verbatim for column classification.
    Text(String),
    Missing,
}

impl RawValue {
    /// Classifies one trimmed cell. Empty cells and common null markers
    /// (including the en-dash seen in weather exports) count as missing.
    pub fn from_cell(cell: &str) -> RawValue {
        let s = cell.trim();
        if s.is_empty()
            || s == "-"
            || s == "\u{2013}"
            || s.eq_ignore_ascii_case("na")
            || s.eq_ignore_ascii_case("n/a")
            || s.eq_ignore_ascii_case("nan")
            || s.eq_ignore_ascii_case("null")
        {
            return RawValue::Missing;
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => RawValue::Number(v),
            _ => RawValue::Text(s.to_string()),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            RawValue::Number(v) => Some(*v),
            _ => None,
        }
    }
}

/// One named column of raw cells.
#[derive(Clone, Debug)]
pub struct RawColumn {
    pub name: String,
    pub values: Vec<RawValue>,
}

/// An ordered raw time series: strictly increasing timestamps after
/// deduplication, with columns of possibly missing or textual cells.
#[derive(Clone, Debug, Default)]
pub struct RawSeries {
    pub timestamps: Vec<NaiveDateTime>,
    pub columns: Vec<RawColumn>,
    /// Ingest and screening provenance, one line per event.
    pub log: Vec<String>,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

/// Layout of a delimited input file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFormat {
    /// Field delimiter as a single byte (default `,`).
    pub delimiter: char,
    /// Header name of the timestamp column.
    pub timestamp_column: String,
    /// `chrono` pattern for parsing timestamps.
    pub timestamp_format: String,
    /// Offset added to every parsed timestamp, normalizing all series to
    /// one timezone before alignment.
    pub utc_offset_minutes: i32,
}

impl Default for TableFormat {
    fn default() -> Self {
        TableFormat {
            delimiter: ',',
            timestamp_column: "timestamp".to_string(),
            timestamp_format: DATASET_TIMESTAMP_FORMAT.to_string(),
            utc_offset_minutes: 0,
        }
    }
}

/// A fully numeric modeling table: inputs, response, row timestamps, and
/// tight per-variable ranges attained by the retained data.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedDataset {
    /// Input variable names; the five timestamp components come first.
    pub variables: Vec<String>,
    /// Row-major input matrix, `rows.len() × variables.len()`.
    pub rows: Vec<Vec<f64>>,
    pub response: Vec<f64>,
    pub response_name: String,
    pub timestamps: Vec<NaiveDateTime>,
    /// Tight `[min, max]` per input variable, both endpoints attained.
    pub ranges: Vec<Interval>,
    /// Provenance log inherited from ingest/screen/align/split steps.
    pub log: Vec<String>,
}

/// JSON sidecar persisted next to a dataset's delimited file.
#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub variables: Vec<String>,
    pub response_name: String,
    pub ranges: Vec<Interval>,
    pub log: Vec<String>,
}

impl AlignedDataset {
    /// Validates shape and finiteness, and computes tight ranges.
    pub fn new(
        variables: Vec<String>,
        rows: Vec<Vec<f64>>,
        response: Vec<f64>,
        timestamps: Vec<NaiveDateTime>,
        response_name: String,
        log: Vec<String>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::input("dataset has no rows"));
        }
        if variables.is_empty() {
            return Err(Error::input("dataset has no input variables"));
        }
        if rows.len() != response.len() || rows.len() != timestamps.len() {
            return Err(Error::input(format!(
                "row/response/timestamp count mismatch: {}/{}/{}",
                rows.len(),
                response.len(),
                timestamps.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != variables.len() {
                return Err(Error::input(format!(
                    "row {i} has {} values, expected {}",
                    row.len(),
                    variables.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("row {i} contains a non-finite value")));
            }
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("response contains a non-finite value"));
        }
        let ranges = tight_ranges(&variables, &rows);
        Ok(AlignedDataset {
            variables,
            rows,
            response,
            response_name,
            timestamps,
            ranges,
            log,
        })
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of input variables.
    pub fn input_count(&self) -> usize {
        self.variables.len()
    }

    /// One input column as an owned vector.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[index]).collect()
    }

    /// Index of a variable by name.
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// Projects the dataset onto a subset of variables (by name), keeping
    /// row order. Used for second-stage modeling on selected drivers.
    pub fn project(&self, keep: &[String]) -> Result<AlignedDataset> {
        let mut indices = Vec::with_capacity(keep.len());
        for name in keep {
            let i = self
                .variable_index(name)
                .ok_or_else(|| Error::input(format!("unknown variable '{name}'")))?;
            indices.push(i);
        }
        let rows = self
            .rows
            .iter()
            .map(|r| indices.iter().map(|&i| r[i]).collect())
            .collect();
        let mut log = self.log.clone();
        log.push(format!("projected to {} variables: {}", keep.len(), keep.join(", ")));
        AlignedDataset::new(
            keep.to_vec(),
            rows,
            self.response.clone(),
            self.timestamps.clone(),
            self.response_name.clone(),
            log,
        )
    }

    fn sidecar_path(path: &Path) -> PathBuf {
        path.with_extension("json")
    }

    /// Writes the dataset as a delimited file plus a JSON sidecar carrying
    /// schema, ranges, and the provenance log.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        let mut header = Vec::with_capacity(self.variables.len() + 2);
        header.push("timestamp".to_string());
        header.extend(self.variables.iter().cloned());
        header.push(self.response_name.clone());
        w.write_record(&header)?;
        for ((ts, row), y) in self.timestamps.iter().zip(&self.rows).zip(&self.response) {
            let mut record = Vec::with_capacity(header.len());
            record.push(ts.format(DATASET_TIMESTAMP_FORMAT).to_string());
            record.extend(row.iter().map(|v| v.to_string()));
            record.push(y.to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        let sidecar = DatasetSidecar {
            variables: self.variables.clone(),
            response_name: self.response_name.clone(),
            ranges: self.ranges.clone(),
            log: self.log.clone(),
        };
        let mut f = BufWriter::new(File::create(Self::sidecar_path(path))?);
        serde_json::to_writer_pretty(&mut f, &sidecar)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    /// Reads a dataset persisted by [`AlignedDataset::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let sidecar_path = Self::sidecar_path(path);
        let sidecar: DatasetSidecar = serde_json::from_reader(BufReader::new(
            File::open(&sidecar_path).map_err(|e| {
                Error::MissingArtifact(format!("{}: {e}", sidecar_path.display()))
            })?,
        ))?;
        let mut r = csv::Reader::from_reader(BufReader::new(File::open(path).map_err(
            |e| Error::MissingArtifact(format!("{}: {e}", path.display())),
        )?));
        let headers = r.headers()?.clone();
        let expected_width = sidecar.variables.len() + 2;
        if headers.len() != expected_width {
            return Err(Error::input(format!(
                "dataset file has {} columns, sidecar expects {expected_width}",
                headers.len()
            )));
        }
        let mut timestamps = Vec::new();
        let mut rows = Vec::new();
        let mut response = Vec::new();
        for record in r.records() {
            let record = record?;
            let ts = NaiveDateTime::parse_from_str(&record[0], DATASET_TIMESTAMP_FORMAT)
                .map_err(|e| Error::input(format!("bad timestamp '{}': {e}", &record[0])))?;
            let mut row = Vec::with_capacity(sidecar.variables.len());
            for cell in record.iter().skip(1).take(sidecar.variables.len()) {
                row.push(
                    cell.parse::<f64>()
                        .map_err(|e| Error::input(format!("bad numeric cell '{cell}': {e}")))?,
                );
            }
            let y = record[expected_width - 1]
                .parse::<f64>()
                .map_err(|e| Error::input(format!("bad response cell: {e}")))?;
            timestamps.push(ts);
            rows.push(row);
            response.push(y);
        }
        AlignedDataset::new(
            sidecar.variables,
            rows,
            response,
            timestamps,
            sidecar.response_name,
            sidecar.log,
        )
    }
}

fn tight_ranges(variables: &[String], rows: &[Vec<f64>]) -> Vec<Interval> {
    (0..variables.len())
        .map(|i| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for row in rows {
                lo = lo.min(row[i]);
                hi = hi.max(row[i]);
            }
            Interval::new(lo, hi)
        })
        .collect()
}
