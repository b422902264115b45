//! Post-run model curation and feature selection: robustness screening,
//! threshold/Pareto-proximity selection, variable presence, mean-ablation
//! variable contribution, and niching by variable combination.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::AlignedDataset;
use crate::evolution::{
    from_record, select_by_layers, shared_schema, to_record, GpModel, ModelRecord,
};
use crate::expr::Interval;
use crate::fitness::{self, scaled_correlation_error};
use crate::{Error, Result};

/// Thresholds and retention fraction for [`select_model_set`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionSpec {
    /// Upper bound on scaled-correlation error (inclusive).
    pub max_error: f64,
    /// Upper bound on expressional complexity (inclusive).
    pub max_complexity: u64,
    /// Share of threshold-passing models retained, closest to the Pareto
    /// front first; in (0, 1].
    pub retain_fraction: f64,
}

impl SelectionSpec {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.max_error) {
            return Err(Error::input("max_error must lie in [0, 1]"));
        }
        if self.max_complexity == 0 {
            return Err(Error::input("max_complexity must be positive"));
        }
        if !(self.retain_fraction > 0.0 && self.retain_fraction <= 1.0) {
            return Err(Error::input("retain_fraction must lie in (0, 1]"));
        }
        Ok(())
    }

    fn admits(&self, model: &GpModel) -> bool {
        model.quality.error <= self.max_error && model.quality.complexity <= self.max_complexity
    }
}

/// A curated model set: the survivors of thresholding plus Pareto-proximity
/// retention, with the spec that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSet {
    pub models: Vec<GpModel>,
    pub spec: SelectionSpec,
    /// Size of the superset the selection drew from.
    pub source_size: usize,
    /// Human-readable notes from the selection step.
    pub log: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ModelSetFileWithSpec {
    spec: SelectionSpec,
    source_size: usize,
    variables: Vec<String>,
    variable_ranges: Vec<Interval>,
    log: Vec<String>,
    models: Vec<ModelRecord>,
}

impl ModelSet {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let (variables, variable_ranges) = shared_schema(&self.models)?;
        crate::evolution::write_json(
            path,
            &ModelSetFileWithSpec {
                spec: self.spec,
                source_size: self.source_size,
                variables,
                variable_ranges,
                log: self.log.clone(),
                models: self.models.iter().map(to_record).collect(),
            },
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ModelSetFileWithSpec = crate::evolution::read_json(path)?;
        let models = file
            .models
            .iter()
            .map(|r| from_record(r, &file.variables, &file.variable_ranges))
            .collect::<Result<Vec<_>>>()?;
        let set = ModelSet {
            models,
            spec: file.spec,
            source_size: file.source_size,
            log: file.log,
        };
        if let Some(bad) = set.models.iter().find(|m| !set.spec.admits(m)) {
            return Err(Error::input(format!(
                "stored model '{}' violates the recorded selection thresholds",
                bad.expression_text()
            )));
        }
        Ok(set)
    }
}

/// Keeps models whose interval evaluation over `ranges` is bounded and free
/// of potential pathologies (division through zero, square roots of
/// negative subranges, overflow), deduplicating by expression text.
///
/// The screen is conservative: interval arithmetic may reject a model that
/// never misbehaves on the actual data, but every retained model is
/// guaranteed finite everywhere inside the ranges.
pub fn filter_robust(models: &[GpModel], ranges: &[Interval]) -> Result<Vec<GpModel>> {
    let verdicts: Vec<bool> = models
        .par_iter()
        .map(|m| Ok(!m.tree.interval_eval(ranges)?.pathological))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = BTreeSet::new();
    Ok(models
        .iter()
        .zip(verdicts)
        .filter(|(m, robust)| *robust && seen.insert(m.expression_text()))
        .map(|(m, _)| m.clone())
        .collect())
}

/// Applies the spec's thresholds, then retains `retain_fraction` of the
/// survivors closest to the 2-D Pareto front (complexity, error): whole
/// layers first, the final layer truncated by error ascending. The retained
/// count is `ceil(fraction · survivors)`. An empty result is not an error;
/// it comes back as an empty set with diagnostics in the log.
pub fn select_model_set(models: &[GpModel], spec: SelectionSpec) -> Result<ModelSet> {
    if models.is_empty() {
        return Err(Error::input("cannot select from an empty model list"));
    }
    spec.validate()?;
    let eligible: Vec<&GpModel> = models.iter().filter(|m| spec.admits(m)).collect();
    let mut log = vec![format!(
        "{} of {} models pass error <= {} and complexity <= {}",
        eligible.len(),
        models.len(),
        spec.max_error,
        spec.max_complexity
    )];
    if eligible.is_empty() {
        log.push("selection is empty; loosen the thresholds".to_string());
        return Ok(ModelSet {
            models: Vec::new(),
            spec,
            source_size: models.len(),
            log,
        });
    }
    let retain = ((spec.retain_fraction * eligible.len() as f64).ceil() as usize)
        .clamp(1, eligible.len());
    let objectives: Vec<Vec<f64>> = eligible
        .iter()
        .map(|m| vec![m.quality.complexity as f64, m.quality.error])
        .collect();
    let picked = select_by_layers(&objectives, retain);
    log.push(format!(
        "retained {} of {} eligible models (fraction {})",
        picked.len(),
        eligible.len(),
        spec.retain_fraction
    ));
    Ok(ModelSet {
        models: picked.into_iter().map(|i| eligible[i].clone()).collect(),
        spec,
        source_size: models.len(),
        log,
    })
}

/// Share of models a variable appears in, for every schema variable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PresenceRow {
    pub variable: String,
    /// Fraction of set models whose tree uses the variable, in [0, 1].
    pub presence: f64,
    /// 1-based rank by descending presence.
    pub rank: usize,
}

/// Presence fraction per schema variable, sorted descending (ties keep
/// schema order). A variable counts once per model regardless of how often
/// it occurs inside the tree.
pub fn variable_presence(set: &ModelSet) -> Result<Vec<PresenceRow>> {
    let first = set
        .models
        .first()
        .ok_or_else(|| Error::input("variable presence needs a nonempty model set"))?;
    let variables = &first.data_variables;
    let mut counts = vec![0usize; variables.len()];
    for model in &set.models {
        for v in model.tree.variables_used() {
            counts[v] += 1;
        }
    }
    let mut rows: Vec<(usize, f64)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, c as f64 / set.models.len() as f64))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(rank, (i, presence))| PresenceRow {
            variable: variables[i].clone(),
            presence,
            rank: rank + 1,
        })
        .collect())
}

/// Median mean-ablation contribution of a variable, in error units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContributionRow {
    pub variable: String,
    /// Median over models containing the variable of
    /// `error(ablated) − error(model)`, each floored at 0.
    pub contribution: f64,
    /// Number of models the median is taken over.
    pub models: usize,
    /// 1-based rank by descending contribution.
    pub rank: usize,
}

/// Mean-ablation contribution: for each model and each variable it uses,
/// the model is re-evaluated with that variable's column replaced by its
/// training mean; the error increase (floored at 0) is the variable's
/// contribution in that model, and the reported statistic is the median
/// across models containing the variable. Variables absent from every
/// model are omitted rather than reported as zero.
pub fn variable_contribution(
    set: &ModelSet,
    training: &AlignedDataset,
) -> Result<Vec<ContributionRow>> {
    let first = set
        .models
        .first()
        .ok_or_else(|| Error::input("variable contribution needs a nonempty model set"))?;
    if first.data_variables != training.variables {
        return Err(Error::input(
            "model set and training data disagree on the variable schema",
        ));
    }

    let used_anywhere: BTreeSet<usize> = set
        .models
        .iter()
        .flat_map(|m| m.tree.variables_used())
        .collect();
    let means: Vec<f64> = (0..training.input_count())
        .map(|i| fitness::mean(&training.column(i)))
        .collect();
    let ablated_rows: BTreeMap<usize, Vec<Vec<f64>>> = used_anywhere
        .iter()
        .map(|&v| {
            let rows = training
                .rows
                .iter()
                .map(|row| {
                    let mut row = row.clone();
                    row[v] = means[v];
                    row
                })
                .collect();
            (v, rows)
        })
        .collect();

    let per_model: Vec<Vec<(usize, f64)>> = set
        .models
        .par_iter()
        .map(|model| {
            let baseline_pred = model.predict(&training.rows)?;
            let baseline = scaled_correlation_error(&baseline_pred, &training.response)?;
            model
                .tree
                .variables_used()
                .into_iter()
                .map(|v| {
                    let pred = model.predict(&ablated_rows[&v])?;
                    let ablated = scaled_correlation_error(&pred, &training.response)?;
                    Ok((v, (ablated - baseline).max(0.0)))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut deltas: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for contributions in per_model {
        for (v, delta) in contributions {
            deltas.entry(v).or_default().push(delta);
        }
    }
    let mut rows: Vec<(usize, f64, usize)> = deltas
        .into_iter()
        .map(|(v, ds)| (v, fitness::median(&ds), ds.len()))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(rank, (v, contribution, models))| ContributionRow {
            variable: training.variables[v].clone(),
            contribution,
            models,
            rank: rank + 1,
        })
        .collect())
}

/// One niche: all models that use exactly this variable combination.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NicheRow {
    pub variables: Vec<String>,
    pub count: usize,
    pub best_error: f64,
}

/// Groups models by the exact set of variables their tree uses and reports
/// each group's size and best error, sorted by best error ascending.
pub fn niche_by_variable_combination(set: &ModelSet) -> Result<Vec<NicheRow>> {
    let first = set
        .models
        .first()
        .ok_or_else(|| Error::input("niching needs a nonempty model set"))?;
    let variables = &first.data_variables;
    let mut groups: BTreeMap<Vec<usize>, (usize, f64)> = BTreeMap::new();
    for model in &set.models {
        let key: Vec<usize> = model.tree.variables_used().into_iter().collect();
        let entry = groups.entry(key).or_insert((0, f64::INFINITY));
        entry.0 += 1;
        entry.1 = entry.1.min(model.quality.error);
    }
    let mut rows: Vec<NicheRow> = groups
        .into_iter()
        .map(|(key, (count, best_error))| NicheRow {
            variables: key.into_iter().map(|v| variables[v].clone()).collect(),
            count,
            best_error,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.best_error
            .total_cmp(&b.best_error)
            .then_with(|| a.variables.cmp(&b.variables))
    });
    Ok(rows)
}
