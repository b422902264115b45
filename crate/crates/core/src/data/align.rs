//! Two-cadence alignment and date-based splitting.

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use super::{AlignedDataset, RawSeries};
use crate::error::{Error, Result};

/// Length of the response-averaging window following each predictor
/// timestamp, inclusive: `[t, t+25]` minutes at a 5-minute cadence.
const WINDOW_MINUTES: i64 = 25;

/// Names of the timestamp components emitted as leading input variables.
pub(crate) const TIME_COMPONENTS: [&str; 5] = ["year", "month", "day", "hour", "minute"];

/// Joins a 30-minute-cadence predictor series with a finer-cadence response
/// series. For every predictor row stamped at minute 0 or 30, the response
/// is averaged over `[t, t+25]` minutes (at least one sample required), and
/// the timestamp's year/month/day/hour/minute become five leading input
/// variables. Predictor rows must be fully numeric; screen first.
pub fn align(predictors: &RawSeries, response: &RawSeries) -> Result<AlignedDataset> {
    if predictors.is_empty() || response.is_empty() {
        return Err(Error::input("cannot align empty series"));
    }
    let response_column = response
        .columns
        .first()
        .ok_or_else(|| Error::input("response series has no value column"))?;

    let mut response_samples: BTreeMap<NaiveDateTime, f64> = BTreeMap::new();
    for (ts, v) in response.timestamps.iter().zip(&response_column.values) {
        if let Some(num) = v.as_number() {
            response_samples.insert(*ts, num);
        }
    }
    if response_samples.is_empty() {
        return Err(Error::input("response series has no numeric samples"));
    }

    let mut log = predictors.log.clone();
    log.extend(response.log.iter().cloned());

    let (variables, renames) = build_variable_names(predictors);
    for line in renames {
        log.push(line);
    }

    let mut rows = Vec::new();
    let mut out_response = Vec::new();
    let mut timestamps = Vec::new();
    let mut off_cadence = 0usize;
    let mut incomplete = 0usize;
    let mut windowless = 0usize;
    for (r, ts) in predictors.timestamps.iter().enumerate() {
        if !(ts.minute() == 0 || ts.minute() == 30) || ts.second() != 0 {
            off_cadence += 1;
            continue;
        }
        let mut row = Vec::with_capacity(variables.len());
        row.push(ts.year() as f64);
        row.push(ts.month() as f64);
        row.push(ts.day() as f64);
        row.push(ts.hour() as f64);
        row.push(ts.minute() as f64);
        let mut complete = true;
        for col in &predictors.columns {
            match col.values[r].as_number() {
                Some(v) => row.push(v),
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            incomplete += 1;
            continue;
        }
        let window_end = *ts + Duration::minutes(WINDOW_MINUTES);
        let window: Vec<f64> = response_samples
            .range(*ts..=window_end)
            .map(|(_, v)| *v)
            .collect();
        if window.is_empty() {
            windowless += 1;
            continue;
        }
        out_response.push(window.iter().sum::<f64>() / window.len() as f64);
        rows.push(row);
        timestamps.push(*ts);
    }

    if off_cadence > 0 {
        log.push(format!("skipped {off_cadence} predictor rows off the half-hour cadence"));
    }
    if incomplete > 0 {
        log.push(format!("skipped {incomplete} predictor rows with non-numeric cells"));
    }
    if windowless > 0 {
        log.push(format!("skipped {windowless} predictor rows with no response samples in window"));
    }
    if rows.is_empty() {
        return Err(Error::input(
            "alignment produced zero predictor/response pairs",
        ));
    }
    log.push(format!("aligned {} predictor/response pairs", rows.len()));
    AlignedDataset::new(
        variables,
        rows,
        out_response,
        timestamps,
        response_column.name.clone(),
        log,
    )
}

/// Prefixes the five timestamp components, sanitizes predictor names into
/// expression-grammar identifiers, and deduplicates collisions.
fn build_variable_names(predictors: &RawSeries) -> (Vec<String>, Vec<String>) {
    let mut names: Vec<String> = TIME_COMPONENTS.iter().map(|s| s.to_string()).collect();
    let mut renames = Vec::new();
    for col in &predictors.columns {
        let base = sanitize_name(&col.name);
        let mut candidate = base.clone();
        let mut suffix = 2;
        while names.contains(&candidate) {
            candidate = format!("{base}_{suffix}");
            suffix += 1;
        }
        if candidate != col.name {
            renames.push(format!(
                "renamed column '{}' to '{candidate}' for expression grammar",
                col.name
            ));
        }
        names.push(candidate);
    }
    (names, renames)
}

/// Maps arbitrary header text to a valid identifier: alphanumerics and
/// underscores only, never starting with a digit, never a function name.
fn sanitize_name(raw: &str) -> String {
    let mut s: String = raw
        .trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() || s.as_bytes()[0].is_ascii_digit() {
        s.insert(0, 'v');
    }
    if s == "sqrt" || s == "inv" {
        s.push('_');
    }
    s
}

/// Splits rows by calendar date with closed-open ranges `[start, end)`.
/// Ranges must not overlap; both partitions must be non-empty. Each
/// partition's variable ranges are recomputed tight over its own rows; the
/// training partition's ranges are the ones downstream modeling uses.
pub fn split_by_date(
    ds: &AlignedDataset,
    train_range: (NaiveDate, NaiveDate),
    test_range: (NaiveDate, NaiveDate),
) -> Result<(AlignedDataset, AlignedDataset)> {
    for (name, (start, end)) in [("train", train_range), ("test", test_range)] {
        if start >= end {
            return Err(Error::input(format!(
                "{name} range is empty: [{start}, {end})"
            )));
        }
    }
    let overlap = train_range.0 < test_range.1 && test_range.0 < train_range.1;
    if overlap {
        return Err(Error::input("train and test date ranges overlap"));
    }
    let in_range = |ts: &NaiveDateTime, range: (NaiveDate, NaiveDate)| {
        let d = ts.date();
        d >= range.0 && d < range.1
    };
    let take = |range: (NaiveDate, NaiveDate), label: &str| -> Result<AlignedDataset> {
        let mut rows = Vec::new();
        let mut response = Vec::new();
        let mut timestamps = Vec::new();
        for (i, ts) in ds.timestamps.iter().enumerate() {
            if in_range(ts, range) {
                rows.push(ds.rows[i].clone());
                response.push(ds.response[i]);
                timestamps.push(*ts);
            }
        }
        if rows.is_empty() {
            return Err(Error::input(format!(
                "{label} partition [{}, {}) is empty",
                range.0, range.1
            )));
        }
        let mut log = ds.log.clone();
        log.push(format!(
            "{label} partition [{}, {}): {} rows",
            range.0,
            range.1,
            rows.len()
        ));
        AlignedDataset::new(
            ds.variables.clone(),
            rows,
            response,
            timestamps,
            ds.response_name.clone(),
            log,
        )
    };
    Ok((take(train_range, "train")?, take(test_range, "test")?))
}
