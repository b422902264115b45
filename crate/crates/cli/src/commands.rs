//! Subcommand implementations and the on-disk artifact layout.
//!
//! Layout under the configured output directory:
//!
//! ```text
//! dataset/train.csv + train.json      cmd_ingest
//! dataset/test.csv  + test.json       cmd_ingest
//! stage1/run_00.json ...              cmd_evolve --stage 1
//! stage1/superset.json                cmd_evolve --stage 1
//! stage1/selected.json                cmd_select --stage 1
//! stage1/{presence,contribution,niche,pareto}.csv   cmd_analyze --stage 1
//! stage2/...                          same files for --stage 2
//! ensemble.json + members.csv         cmd_ensemble
//! predictions.csv                     cmd_predict
//! report/summary.json                 cmd_report
//! report/pareto_stage1.csv (+2)       cmd_report
//! report/predicted_vs_actual.csv      cmd_report
//! ```
//!
//! Every command reads its inputs from disk and rewrites its outputs in
//! full, so any tail of the pipeline can be rerun after a config change.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use symreg::analysis::{
    filter_robust, niche_by_variable_combination, select_model_set, variable_contribution,
    variable_presence, ModelSet,
};
use symreg::data::{
    align, parse_table, screen_variables, split_by_date, AlignedDataset,
    DATASET_TIMESTAMP_FORMAT,
};
use symreg::ensemble::{create_ensemble, ensemble_predict, evaluate_ensemble, Ensemble};
use symreg::evolution::{
    load_model_set, merge_runs, run_independent_evolutions, save_model_set, GpModel,
};
use symreg::{Error, Result};

use crate::config::ProjectConfig;

/// The two modeling iterations: stage one explores the full variable set,
/// stage two re-runs the evolution on the analyst's restricted variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    One,
    Two,
}

impl Stage {
    /// 1-based stage number as printed in logs and file names.
    pub fn number(self) -> u8 {
        match self {
            Stage::One => 1,
            Stage::Two => 2,
        }
    }
}

/// The stage whose model set feeds the ensemble: stage two when the config
/// restricts variables, stage one otherwise.
pub fn final_stage(config: &ProjectConfig) -> Stage {
    if config.stage2_variables.is_empty() {
        Stage::One
    } else {
        Stage::Two
    }
}

/// Artifact paths under one output directory.
pub struct OutPaths {
    root: PathBuf,
}

impl OutPaths {
    pub fn new(root: &Path) -> Self {
        OutPaths {
            root: root.to_path_buf(),
        }
    }

    pub fn train(&self) -> PathBuf {
        self.root.join("dataset").join("train.csv")
    }

    pub fn test(&self) -> PathBuf {
        self.root.join("dataset").join("test.csv")
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.root.join(format!("stage{}", stage.number()))
    }

    pub fn run_archive(&self, stage: Stage, run_id: u64) -> PathBuf {
        self.stage_dir(stage).join(format!("run_{run_id:02}.json"))
    }

    pub fn superset(&self, stage: Stage) -> PathBuf {
        self.stage_dir(stage).join("superset.json")
    }

    pub fn selected(&self, stage: Stage) -> PathBuf {
        self.stage_dir(stage).join("selected.json")
    }

    pub fn ensemble(&self) -> PathBuf {
        self.root.join("ensemble.json")
    }

    pub fn members(&self) -> PathBuf {
        self.root.join("members.csv")
    }

    pub fn predictions(&self) -> PathBuf {
        self.root.join("predictions.csv")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }
}

/// Restricts the dataset to the stage's variables: identity for stage one,
/// projection onto `stage2_variables` for stage two.
fn stage_view(ds: &AlignedDataset, config: &ProjectConfig, stage: Stage) -> Result<AlignedDataset> {
    match stage {
        Stage::One => Ok(ds.clone()),
        Stage::Two => {
            if config.stage2_variables.is_empty() {
                return Err(Error::input(
                    "stage 2 needs stage2_variables in the config; pick them from the \
                     stage-1 presence/contribution rankings",
                ));
            }
            ds.project(&config.stage2_variables)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(
        path,
    )?)))
}

/// Parses both raw tables, screens sparse predictor columns, aligns the two
/// cadences, splits by date, and persists the train/test datasets.
pub fn cmd_ingest(config: &ProjectConfig) -> Result<()> {
    let predictors = parse_table(&config.predictors_path, &config.predictors_format)?;
    let response = parse_table(&config.response_path, &config.response_format)?;
    let screened = screen_variables(&predictors, config.missing_fraction_threshold)?;
    let dataset = align(&screened, &response)?;
    let (train, test) = split_by_date(
        &dataset,
        (config.train_range.start, config.train_range.end),
        (config.test_range.start, config.test_range.end),
    )?;

    let paths = OutPaths::new(&config.out_dir);
    fs::create_dir_all(config.out_dir.join("dataset"))?;
    train.save(&paths.train())?;
    test.save(&paths.test())?;
    for line in &train.log {
        eprintln!("{line}");
    }
    eprintln!(
        "ingested {} train rows and {} test rows over {} variables",
        train.len(),
        test.len(),
        train.variables.len()
    );
    Ok(())
}

/// Runs the configured number of independent evolutions on the stage's
/// training view and writes one archive per run plus the merged,
/// text-deduplicated superset.
pub fn cmd_evolve(config: &ProjectConfig, stage: Stage) -> Result<()> {
    let paths = OutPaths::new(&config.out_dir);
    let train = AlignedDataset::load(&paths.train())?;
    let data = stage_view(&train, config, stage)?;
    fs::create_dir_all(paths.stage_dir(stage))?;

    let archives = run_independent_evolutions(&data, &config.evolution, |run, stats| {
        eprintln!(
            "stage {} run {run} generation {}: best error {:.4}, front size {}",
            stage.number(),
            stats.generation,
            stats.best_error,
            stats.front_size
        );
    })?;
    for (run_id, archive) in archives.iter().enumerate() {
        archive.save(&paths.run_archive(stage, run_id as u64))?;
    }
    let superset = merge_runs(&archives)?;
    save_model_set(&paths.superset(stage), &superset)?;
    eprintln!(
        "stage {}: merged {} runs into a superset of {} models",
        stage.number(),
        archives.len(),
        superset.len()
    );
    Ok(())
}

/// Screens the stage superset for in-range robustness and selects the model
/// set under the stage's error/complexity thresholds.
pub fn cmd_select(config: &ProjectConfig, stage: Stage) -> Result<()> {
    let paths = OutPaths::new(&config.out_dir);
    let train = AlignedDataset::load(&paths.train())?;
    let data = stage_view(&train, config, stage)?;
    let superset = load_model_set(&paths.superset(stage))?;

    let robust = filter_robust(&superset, &data.ranges)?;
    eprintln!(
        "stage {}: {} of {} superset models are robust over the training ranges",
        stage.number(),
        robust.len(),
        superset.len()
    );
    let spec = match stage {
        Stage::One => config.stage1_selection,
        Stage::Two => config.stage2_selection,
    };
    let set = select_model_set(&robust, spec)?;
    for line in &set.log {
        eprintln!("{line}");
    }
    set.save(&paths.selected(stage))?;
    Ok(())
}

/// Writes the presence, contribution, and niche tables for the stage's
/// selected models, plus the Pareto scatter of the full superset with the
/// selected models flagged.
pub fn cmd_analyze(config: &ProjectConfig, stage: Stage) -> Result<()> {
    let paths = OutPaths::new(&config.out_dir);
    let train = AlignedDataset::load(&paths.train())?;
    let data = stage_view(&train, config, stage)?;
    let set = ModelSet::load(&paths.selected(stage))?;
    let superset = load_model_set(&paths.superset(stage))?;
    let dir = paths.stage_dir(stage);

    let mut w = csv_writer(&dir.join("presence.csv"))?;
    w.write_record(["variable", "presence", "rank"])?;
    for row in variable_presence(&set)? {
        w.write_record(&[row.variable, row.presence.to_string(), row.rank.to_string()])?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("contribution.csv"))?;
    w.write_record(["variable", "contribution", "models", "rank"])?;
    for row in variable_contribution(&set, &data)? {
        w.write_record(&[
            row.variable,
            row.contribution.to_string(),
            row.models.to_string(),
            row.rank.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("niche.csv"))?;
    w.write_record(["variables", "count", "best_error"])?;
    for row in niche_by_variable_combination(&set)? {
        w.write_record(&[
            row.variables.join("+"),
            row.count.to_string(),
            row.best_error.to_string(),
        ])?;
    }
    w.flush()?;

    write_pareto_csv(&dir.join("pareto.csv"), &superset, &set)?;
    eprintln!(
        "stage {}: analyzed {} selected models",
        stage.number(),
        set.len()
    );
    Ok(())
}

/// Pareto scatter rows: one (complexity, error) point per superset model,
/// flagged 1 when the model made the selected set.
fn write_pareto_csv(path: &Path, superset: &[GpModel], selected: &ModelSet) -> Result<()> {
    let chosen: std::collections::BTreeSet<String> = selected
        .models
        .iter()
        .map(|m| m.expression_text())
        .collect();
    let mut w = csv_writer(path)?;
    w.write_record(["complexity", "error", "selected"])?;
    for model in superset {
        let flag = if chosen.contains(&model.expression_text()) {
            "1"
        } else {
            "0"
        };
        w.write_record(&[
            model.quality.complexity.to_string(),
            model.quality.error.to_string(),
            flag.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Builds the ensemble from the final stage's selected models and writes
/// the member table with train and test errors.
pub fn cmd_ensemble(config: &ProjectConfig) -> Result<()> {
    let stage = final_stage(config);
    eprintln!(
        "building the ensemble from the stage {} model set",
        stage.number()
    );
    let paths = OutPaths::new(&config.out_dir);
    let train = AlignedDataset::load(&paths.train())?;
    let test = AlignedDataset::load(&paths.test())?;
    let train_view = stage_view(&train, config, stage)?;
    let test_view = stage_view(&test, config, stage)?;
    let set = ModelSet::load(&paths.selected(stage))?;

    let ensemble = create_ensemble(
        &set,
        &train_view,
        config.ensemble_size,
        config.ensemble_complexity_cap,
    )?;
    ensemble.save(&paths.ensemble())?;

    let report = evaluate_ensemble(&ensemble, &test_view)?;
    let mut w = csv_writer(&paths.members())?;
    w.write_record(["expression", "complexity", "train_error", "test_error"])?;
    for member in &report.members {
        w.write_record(&[
            member.expression.clone(),
            member.complexity.to_string(),
            member.train_error.to_string(),
            member.test_error.to_string(),
        ])?;
    }
    w.flush()?;
    eprintln!(
        "ensemble of {} models, test normalized RMSE {:.4}",
        ensemble.members.len(),
        report.normalized_rmse
    );
    Ok(())
}

/// Projects a dataset onto the variable schema the ensemble was trained
/// with. A no-op when the schemas already agree.
fn match_schema(ds: &AlignedDataset, ensemble: &Ensemble) -> Result<AlignedDataset> {
    let schema = &ensemble.members[0].data_variables;
    if &ds.variables == schema {
        Ok(ds.clone())
    } else {
        ds.project(schema)
    }
}

/// Writes one prediction band per test row. Rows where every member is
/// non-finite keep their timestamp but leave the band cells empty.
pub fn cmd_predict(config: &ProjectConfig) -> Result<()> {
    let paths = OutPaths::new(&config.out_dir);
    let ensemble = Ensemble::load(&paths.ensemble())?;
    let test = AlignedDataset::load(&paths.test())?;
    let view = match_schema(&test, &ensemble)?;
    let bands = ensemble_predict(&ensemble, &view.rows)?;

    let mut w = csv_writer(&paths.predictions())?;
    w.write_record(["timestamp", "point", "spread", "observed"])?;
    for ((ts, band), observed) in test.timestamps.iter().zip(&bands).zip(&test.response) {
        let (point, spread) = match band {
            Some(b) => (b.point.to_string(), b.spread.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record(&[
            ts.format(DATASET_TIMESTAMP_FORMAT).to_string(),
            point,
            spread,
            observed.to_string(),
        ])?;
    }
    w.flush()?;
    let valid = bands.iter().filter(|b| b.is_some()).count();
    eprintln!("wrote {} predictions ({} with valid bands)", bands.len(), valid);
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    normalized_rmse_train: f64,
    normalized_rmse_test: f64,
    ensemble_size: usize,
    ensemble_stage: u8,
    /// Union of the variables the ensemble members actually use.
    selected_variables: Vec<String>,
}

/// Bundles everything a write-up needs into `report/`: the summary JSON,
/// per-stage Pareto scatter data, and the predicted-vs-actual table.
pub fn cmd_report(config: &ProjectConfig) -> Result<()> {
    let paths = OutPaths::new(&config.out_dir);
    let ensemble = Ensemble::load(&paths.ensemble())?;
    let train = AlignedDataset::load(&paths.train())?;
    let test = AlignedDataset::load(&paths.test())?;
    let train_view = match_schema(&train, &ensemble)?;
    let test_view = match_schema(&test, &ensemble)?;
    let dir = paths.report_dir();
    fs::create_dir_all(&dir)?;

    let train_report = evaluate_ensemble(&ensemble, &train_view)?;
    let test_report = evaluate_ensemble(&ensemble, &test_view)?;

    let mut used = std::collections::BTreeSet::new();
    for member in &ensemble.members {
        for index in member.tree.variables_used() {
            used.insert(member.data_variables[index].clone());
        }
    }
    let summary = Summary {
        normalized_rmse_train: train_report.normalized_rmse,
        normalized_rmse_test: test_report.normalized_rmse,
        ensemble_size: ensemble.members.len(),
        ensemble_stage: final_stage(config).number(),
        selected_variables: used.into_iter().collect(),
    };
    write_json(&dir.join("summary.json"), &summary)?;

    let stages: &[Stage] = if config.stage2_variables.is_empty() {
        &[Stage::One]
    } else {
        &[Stage::One, Stage::Two]
    };
    for &stage in stages {
        let superset = load_model_set(&paths.superset(stage))?;
        let selected = ModelSet::load(&paths.selected(stage))?;
        write_pareto_csv(
            &dir.join(format!("pareto_stage{}.csv", stage.number())),
            &superset,
            &selected,
        )?;
    }

    let mut w = csv_writer(&dir.join("predicted_vs_actual.csv"))?;
    w.write_record(["timestamp", "actual", "predicted"])?;
    for ((ts, band), actual) in test
        .timestamps
        .iter()
        .zip(&test_report.bands)
        .zip(&test.response)
    {
        if let Some(band) = band {
            w.write_record(&[
                ts.format(DATASET_TIMESTAMP_FORMAT).to_string(),
                actual.to_string(),
                band.point.to_string(),
            ])?;
        }
    }
    w.flush()?;
    eprintln!(
        "report written: test normalized RMSE {:.4}, variables {}",
        summary.normalized_rmse_test,
        summary.selected_variables.join(", ")
    );
    Ok(())
}
