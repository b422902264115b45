//! Multi-objective genetic programming over expression trees.
//!
//! Evolution minimizes three objectives per individual — expressional
//! complexity, scaled-correlation error, and age — with Pareto-layer
//! elitism and tournaments. A run archives its final population together
//! with the last elite set; several independent runs are merged into a
//! model superset for downstream analysis.

mod engine;
mod pareto;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use engine::{evolve, evolve_with_progress, run_independent_evolutions, GenerationStats};
pub use pareto::{dominates, nondominated_sort, pareto_tournament, select_by_layers};

use crate::expr::{parse_expr, Expr, Interval};
use crate::fitness::QualityVector;
use crate::{Error, Result};

/// Knobs for one evolution run. `Default` matches the settings the engine
/// was tuned with; tests and small demos shrink them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub population_size: usize,
    /// Pareto-elite archive capacity carried across generations.
    pub elite_size: usize,
    /// Entrants per Pareto tournament, drawn without replacement.
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub subtree_mutation_rate: f64,
    pub depth_preserving_mutation_rate: f64,
    /// Hard cap on expressional complexity of raw genotypes.
    pub max_complexity: u64,
    /// Wall-clock stop criterion; runs are not reproducible under it.
    pub time_budget_seconds: Option<f64>,
    /// Generation-count stop criterion; reproducible.
    pub max_generations: Option<u64>,
    /// Number of runs [`run_independent_evolutions`] performs.
    pub independent_evolutions: usize,
    pub rng_seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 300,
            elite_size: 50,
            tournament_size: 30,
            crossover_rate: 0.9,
            subtree_mutation_rate: 0.05,
            depth_preserving_mutation_rate: 0.05,
            max_complexity: 1000,
            time_budget_seconds: Some(2000.0),
            max_generations: None,
            independent_evolutions: 10,
            rng_seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::input("population_size must be positive"));
        }
        if self.elite_size == 0 || self.elite_size >= self.population_size {
            return Err(Error::input(
                "elite_size must be positive and smaller than population_size",
            ));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(Error::input(
                "tournament_size must be in 1..=population_size",
            ));
        }
        let rates = [
            self.crossover_rate,
            self.subtree_mutation_rate,
            self.depth_preserving_mutation_rate,
        ];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::input("variation rates must lie in [0, 1]"));
        }
        if rates.iter().sum::<f64>() > 1.0 {
            return Err(Error::input("variation rates must sum to at most 1"));
        }
        if self.max_complexity == 0 {
            return Err(Error::input("max_complexity must be positive"));
        }
        if self.time_budget_seconds.is_none() && self.max_generations.is_none() {
            return Err(Error::input(
                "set time_budget_seconds or max_generations; otherwise the run never stops",
            ));
        }
        if let Some(budget) = self.time_budget_seconds {
            if !budget.is_finite() || budget < 0.0 {
                return Err(Error::input("time_budget_seconds must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Where an archived model came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub run_id: u64,
    pub generation_born: u64,
}

/// An archived model: a calibrated expression tree plus the context needed
/// to evaluate and audit it without the original run.
#[derive(Clone, Debug, PartialEq)]
pub struct GpModel {
    pub tree: Expr,
    pub quality: QualityVector,
    /// Input schema the tree's variable indices refer to.
    pub data_variables: Vec<String>,
    /// Training ranges per input, used for robustness screening.
    pub variable_ranges: Vec<Interval>,
    pub provenance: Provenance,
}

impl GpModel {
    /// Canonical text form; round-trips through [`parse_expr`].
    pub fn expression_text(&self) -> String {
        self.tree.to_text(&self.data_variables)
    }

    /// Evaluates the model on each row. Rows must follow
    /// [`GpModel::data_variables`]; singular rows yield NaN.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|row| self.tree.eval(row)).collect()
    }
}

/// Everything one evolution run leaves behind.
#[derive(Clone, Debug, PartialEq)]
pub struct RunArchive {
    pub models: Vec<GpModel>,
    pub config: EvolutionConfig,
    pub generations_completed: u64,
}

/// Serialized form of one model inside an archive or model-set file.
#[derive(Serialize, Deserialize)]
pub(crate) struct ModelRecord {
    pub(crate) expression: String,
    pub(crate) complexity: u64,
    pub(crate) error: f64,
    pub(crate) age: u32,
    pub(crate) run_id: u64,
    pub(crate) generation_born: u64,
}

#[derive(Serialize, Deserialize)]
struct ArchiveFile {
    config: EvolutionConfig,
    variables: Vec<String>,
    variable_ranges: Vec<Interval>,
    generations_completed: u64,
    models: Vec<ModelRecord>,
}

#[derive(Serialize, Deserialize)]
struct ModelSetFile {
    variables: Vec<String>,
    variable_ranges: Vec<Interval>,
    models: Vec<ModelRecord>,
}

pub(crate) fn to_record(model: &GpModel) -> ModelRecord {
    ModelRecord {
        expression: model.expression_text(),
        complexity: model.quality.complexity,
        error: model.quality.error,
        age: model.quality.age,
        run_id: model.provenance.run_id,
        generation_born: model.provenance.generation_born,
    }
}

pub(crate) fn from_record(
    record: &ModelRecord,
    variables: &[String],
    ranges: &[Interval],
) -> Result<GpModel> {
    let tree = parse_expr(&record.expression, variables)?;
    if tree.complexity() != record.complexity {
        return Err(Error::input(format!(
            "stored complexity {} does not match expression '{}' (parses to complexity {})",
            record.complexity,
            record.expression,
            tree.complexity()
        )));
    }
    Ok(GpModel {
        tree,
        quality: QualityVector {
            complexity: record.complexity,
            error: record.error,
            age: record.age,
        },
        data_variables: variables.to_vec(),
        variable_ranges: ranges.to_vec(),
        provenance: Provenance {
            run_id: record.run_id,
            generation_born: record.generation_born,
        },
    })
}

/// Extracts the shared (variables, ranges) schema, erroring on mismatches
/// or an empty set.
pub(crate) fn shared_schema<'a>(
    models: impl IntoIterator<Item = &'a GpModel>,
) -> Result<(Vec<String>, Vec<Interval>)> {
    let mut schema: Option<(&Vec<String>, &Vec<Interval>)> = None;
    for model in models {
        match &schema {
            None => schema = Some((&model.data_variables, &model.variable_ranges)),
            Some((vars, ranges)) => {
                if *vars != &model.data_variables || *ranges != &model.variable_ranges {
                    return Err(Error::input(
                        "models were built on different variable schemas",
                    ));
                }
            }
        }
    }
    schema
        .map(|(v, r)| (v.clone(), r.clone()))
        .ok_or_else(|| Error::input("empty model set"))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)
        .map_err(|e| Error::MissingArtifact(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

impl RunArchive {
    pub fn save(&self, path: &Path) -> Result<()> {
        let (variables, variable_ranges) = shared_schema(&self.models)?;
        write_json(
            path,
            &ArchiveFile {
                config: self.config.clone(),
                variables,
                variable_ranges,
                generations_completed: self.generations_completed,
                models: self.models.iter().map(to_record).collect(),
            },
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ArchiveFile = read_json(path)?;
        let models = file
            .models
            .iter()
            .map(|r| from_record(r, &file.variables, &file.variable_ranges))
            .collect::<Result<Vec<_>>>()?;
        Ok(RunArchive {
            models,
            config: file.config,
            generations_completed: file.generations_completed,
        })
    }
}

/// Saves a bare model list (superset, selected set, ensemble members) with
/// its schema.
pub fn save_model_set(path: &Path, models: &[GpModel]) -> Result<()> {
    let (variables, variable_ranges) = shared_schema(models)?;
    write_json(
        path,
        &ModelSetFile {
            variables,
            variable_ranges,
            models: models.iter().map(to_record).collect(),
        },
    )
}

pub fn load_model_set(path: &Path) -> Result<Vec<GpModel>> {
    let file: ModelSetFile = read_json(path)?;
    file.models
        .iter()
        .map(|r| from_record(r, &file.variables, &file.variable_ranges))
        .collect()
}

/// Concatenates archives from independent runs into one superset,
/// deduplicating by expression text (first occurrence wins). All runs must
/// share the variable schema.
pub fn merge_runs(archives: &[RunArchive]) -> Result<Vec<GpModel>> {
    shared_schema(archives.iter().flat_map(|a| &a.models))?;
    let mut seen = BTreeSet::new();
    Ok(archives
        .iter()
        .flat_map(|a| &a.models)
        .filter(|m| seen.insert(m.expression_text()))
        .cloned()
        .collect())
}
