//! Raw table ingestion and variable screening.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use chrono::{Duration, NaiveDateTime};

use super::{RawColumn, RawSeries, RawValue, TableFormat};
use crate::error::{Error, Result};

/// Reads a delimited file into a [`RawSeries`]: locates the timestamp
/// column, drops rows with unparseable timestamps, sorts by time, and
/// collapses duplicate timestamps to their first occurrence. Every anomaly
/// is counted in the series log.
pub fn parse_table(path: &Path, format: &TableFormat) -> Result<RawSeries> {
    let file = File::open(path)
        .map_err(|e| Error::input(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter as u8)
        .from_reader(BufReader::new(file));
    let headers = reader.headers()?.clone();
    let ts_index = headers
        .iter()
        .position(|h| h.trim() == format.timestamp_column)
        .ok_or_else(|| {
            Error::input(format!(
                "timestamp column '{}' not found in {}",
                format.timestamp_column,
                path.display()
            ))
        })?;
    let value_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ts_index)
        .map(|(_, h)| h.trim().to_string())
        .collect();

    let offset = Duration::minutes(format.utc_offset_minutes as i64);
    let mut parsed: Vec<(NaiveDateTime, Vec<RawValue>)> = Vec::new();
    let mut bad_timestamps = 0usize;
    for record in reader.records() {
        let record = record?;
        let raw_ts = record.get(ts_index).unwrap_or("").trim();
        let Ok(ts) = NaiveDateTime::parse_from_str(raw_ts, &format.timestamp_format) else {
            bad_timestamps += 1;
            continue;
        };
        let cells: Vec<RawValue> = record
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ts_index)
            .map(|(_, c)| RawValue::from_cell(c))
            .collect();
        parsed.push((ts + offset, cells));
    }

    parsed.sort_by_key(|(ts, _)| *ts);
    let before = parsed.len();
    parsed.dedup_by_key(|(ts, _)| *ts);
    let duplicates = before - parsed.len();

    let mut log = Vec::new();
    log.push(format!(
        "ingested {}: {} rows retained",
        path.display(),
        parsed.len()
    ));
    if bad_timestamps > 0 {
        log.push(format!("dropped {bad_timestamps} rows with unparseable timestamps"));
    }
    if duplicates > 0 {
        log.push(format!("collapsed {duplicates} duplicate-timestamp rows to first occurrence"));
    }

    let timestamps: Vec<NaiveDateTime> = parsed.iter().map(|(ts, _)| *ts).collect();
    let columns = value_names
        .into_iter()
        .enumerate()
        .map(|(c, name)| RawColumn {
            name,
            values: parsed.iter().map(|(_, cells)| cells[c].clone()).collect(),
        })
        .collect();
    Ok(RawSeries {
        timestamps,
        columns,
        log,
    })
}

/// Drops columns that are mostly missing (fraction strictly above
/// `missing_fraction_threshold`) or non-numeric (more text cells than
/// numeric among the non-missing ones), then drops rows that still contain
/// any missing or textual cell. Each drop is logged with its reason.
pub fn screen_variables(series: &RawSeries, missing_fraction_threshold: f64) -> Result<RawSeries> {
    let n = series.len();
    if n == 0 {
        return Err(Error::input("cannot screen an empty series"));
    }
    let mut log = series.log.clone();
    let mut kept_columns: Vec<&RawColumn> = Vec::new();
    for col in &series.columns {
        let missing = col
            .values
            .iter()
            .filter(|v| matches!(v, RawValue::Missing))
            .count();
        let text = col
            .values
            .iter()
            .filter(|v| matches!(v, RawValue::Text(_)))
            .count();
        let numeric = n - missing - text;
        let missing_fraction = missing as f64 / n as f64;
        if missing_fraction > missing_fraction_threshold {
            log.push(format!(
                "dropped column '{}': {:.1}% missing exceeds {:.1}% threshold",
                col.name,
                100.0 * missing_fraction,
                100.0 * missing_fraction_threshold
            ));
            continue;
        }
        if text > numeric {
            log.push(format!(
                "dropped column '{}': non-numeric ({text} text vs {numeric} numeric cells)",
                col.name
            ));
            continue;
        }
        kept_columns.push(col);
    }
    if kept_columns.is_empty() {
        return Err(Error::input("variable screening dropped every column"));
    }

    let keep_row: Vec<bool> = (0..n)
        .map(|r| {
            kept_columns
                .iter()
                .all(|c| matches!(c.values[r], RawValue::Number(_)))
        })
        .collect();
    let dropped_rows = keep_row.iter().filter(|k| !**k).count();
    if dropped_rows > 0 {
        log.push(format!(
            "dropped {dropped_rows} rows with missing values in retained columns"
        ));
    }

    let timestamps = series
        .timestamps
        .iter()
        .zip(&keep_row)
        .filter(|(_, k)| **k)
        .map(|(ts, _)| *ts)
        .collect();
    let columns = kept_columns
        .into_iter()
        .map(|c| RawColumn {
            name: c.name.clone(),
            values: c
                .values
                .iter()
                .zip(&keep_row)
                .filter(|(_, k)| **k)
                .map(|(v, _)| v.clone())
                .collect(),
        })
        .collect();
    Ok(RawSeries {
        timestamps,
        columns,
        log,
    })
}
