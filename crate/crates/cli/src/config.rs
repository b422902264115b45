//! Project configuration: one JSON document that drives every subcommand.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use symreg::analysis::SelectionSpec;
use symreg::data::TableFormat;
use symreg::evolution::EvolutionConfig;
use symreg::{Error, Result};

/// Half-open calendar interval `[start, end)` used for the train/test split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

/// Everything the pipeline needs, mirrored one-to-one by the JSON config
/// file. Paths are resolved relative to the working directory of the
/// invocation; the defaults reproduce the reference modeling setup
/// (stage-1 selection at error 0.30 / complexity 350, stage-2 at
/// 0.30 / 250 keeping the nearest quarter, ensemble of 6 under cap 150).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    /// Delimited predictor table (coarse-cadence weather-style data).
    pub predictors_path: PathBuf,
    /// Delimited response table; its first value column is the response.
    pub response_path: PathBuf,
    #[serde(default)]
    pub predictors_format: TableFormat,
    #[serde(default)]
    pub response_format: TableFormat,
    /// Predictor columns missing more than this fraction of rows are
    /// dropped during ingest.
    #[serde(default = "default_missing_fraction")]
    pub missing_fraction_threshold: f64,
    pub train_range: DateRange,
    pub test_range: DateRange,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default = "default_stage1_selection")]
    pub stage1_selection: SelectionSpec,
    #[serde(default = "default_stage2_selection")]
    pub stage2_selection: SelectionSpec,
    /// Variables the analyst retained for the stage-2 evolution, chosen
    /// from the stage-1 presence/contribution rankings. The tool reports
    /// rankings but never drops correlated variables on its own; leaving
    /// this empty disables stage 2 and builds the ensemble from stage 1.
    #[serde(default)]
    pub stage2_variables: Vec<String>,
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    #[serde(default = "default_ensemble_complexity_cap")]
    pub ensemble_complexity_cap: u64,
    /// Directory receiving every artifact the pipeline writes.
    pub out_dir: PathBuf,
}

fn default_missing_fraction() -> f64 {
    0.25
}

fn default_stage1_selection() -> SelectionSpec {
    SelectionSpec {
        max_error: 0.30,
        max_complexity: 350,
        retain_fraction: 1.0,
    }
}

fn default_stage2_selection() -> SelectionSpec {
    SelectionSpec {
        max_error: 0.30,
        max_complexity: 250,
        retain_fraction: 0.25,
    }
}

fn default_ensemble_size() -> usize {
    6
}

fn default_ensemble_complexity_cap() -> u64 {
    150
}

impl ProjectConfig {
    /// Reads and validates a config file. I/O and JSON problems are
    /// reported as input errors naming the path.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| Error::input(format!("cannot open config {}: {e}", path.display())))?;
        let config: ProjectConfig = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::input(format!("malformed config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks the invariants the commands rely on. Referenced input paths
    /// are verified by the commands that open them, so a config for a
    /// dataset that only exists on another machine still parses.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.missing_fraction_threshold) {
            return Err(Error::input(
                "missing_fraction_threshold must lie in [0, 1]",
            ));
        }
        for (name, range) in [
            ("train_range", &self.train_range),
            ("test_range", &self.test_range),
        ] {
            if range.start >= range.end {
                return Err(Error::input(format!(
                    "{name} is empty: [{}, {})",
                    range.start, range.end
                )));
            }
        }
        self.evolution.validate()?;
        if self.ensemble_size == 0 {
            return Err(Error::input("ensemble_size must be at least 1"));
        }
        if self.ensemble_complexity_cap == 0 {
            return Err(Error::input("ensemble_complexity_cap must be positive"));
        }
        for (i, name) in self.stage2_variables.iter().enumerate() {
            if self.stage2_variables[..i].contains(name) {
                return Err(Error::input(format!(
                    "stage2_variables lists '{name}' twice"
                )));
            }
        }
        Ok(())
    }
}
