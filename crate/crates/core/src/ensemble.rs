//! Diverse-model ensembles: residual-decorrelation member selection,
//! median predictions, and standard-deviation confidence bands.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::ModelSet;
use crate::data::AlignedDataset;
use crate::evolution::{from_record, shared_schema, to_record, GpModel, ModelRecord};
use crate::expr::Interval;
use crate::fitness::{self, normalized_rmse, scaled_correlation_error};
use crate::{Error, Result};

/// How an ensemble was selected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub size: usize,
    pub complexity_cap: u64,
}

/// A fixed set of models queried together. Members are pairwise distinct by
/// expression text and each respects the complexity cap.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub members: Vec<GpModel>,
    pub spec: EnsembleSpec,
}

/// One row's ensemble output: the median member prediction and the
/// population standard deviation across members (the confidence band is
/// `point ± spread`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionBand {
    pub point: f64,
    pub spread: f64,
}

/// Selects `size` members from the set's models under `complexity_cap` by
/// residual decorrelation: the seed is the most typical candidate (highest
/// median absolute correlation of its training residuals with all other
/// candidates'), and each following member is the candidate whose largest
/// absolute residual correlation with the current members is smallest.
/// Ties fall to lower error, then lower complexity, then candidate order.
pub fn create_ensemble(
    set: &ModelSet,
    training: &AlignedDataset,
    size: usize,
    complexity_cap: u64,
) -> Result<Ensemble> {
    if size == 0 {
        return Err(Error::input("ensemble size must be at least 1"));
    }
    let mut seen = BTreeSet::new();
    let candidates: Vec<&GpModel> = set
        .models
        .iter()
        .filter(|m| m.quality.complexity <= complexity_cap)
        .filter(|m| seen.insert(m.expression_text()))
        .collect();
    if candidates.len() < size {
        return Err(Error::input(format!(
            "ensemble needs {size} models but only {} of {} candidates fit \
             complexity <= {complexity_cap}",
            candidates.len(),
            set.models.len()
        )));
    }
    if let Some(first) = candidates.first() {
        if first.data_variables != training.variables {
            return Err(Error::input(
                "model set and training data disagree on the variable schema",
            ));
        }
    }

    // Training residuals per candidate; models are archived in response
    // units, so the residual is simply observed − predicted.
    let residuals: Vec<Vec<f64>> = candidates
        .par_iter()
        .map(|m| {
            let pred = m.predict(&training.rows)?;
            Ok(pred
                .iter()
                .zip(&training.response)
                .map(|(p, o)| o - p)
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    // Pairwise |correlation| of residuals. Non-finite correlations (from
    // constant or non-finite residuals) count as perfectly correlated,
    // which steers the greedy step away from such candidates.
    let n = candidates.len();
    let mut corr = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let r = fitness::pearson(&residuals[i], &residuals[j]).abs();
            let r = if r.is_finite() { r } else { 1.0 };
            corr[i][j] = r;
            corr[j][i] = r;
        }
    }

    // Prefer the candidate with the smaller key: the comparison value first,
    // then error, complexity, and candidate order.
    let better = |key_a: f64, a: usize, key_b: f64, b: usize| -> bool {
        key_a
            .total_cmp(&key_b)
            .then_with(|| candidates[a].quality.error.total_cmp(&candidates[b].quality.error))
            .then_with(|| {
                candidates[a]
                    .quality
                    .complexity
                    .cmp(&candidates[b].quality.complexity)
            })
            .then_with(|| a.cmp(&b))
            .is_lt()
    };

    // Seed: most typical, i.e. highest median |correlation| to the others.
    // Negate the median so `better` can minimize throughout.
    let mut picked = vec![false; n];
    let seed = (0..n)
        .map(|i| {
            let others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| corr[i][j]).collect();
            let typicality = if others.is_empty() {
                0.0
            } else {
                fitness::median(&others)
            };
            (i, -typicality)
        })
        .reduce(|best, cur| if better(cur.1, cur.0, best.1, best.0) { cur } else { best })
        .map(|(i, _)| i)
        .expect("candidates are nonempty");
    picked[seed] = true;
    let mut members = vec![seed];

    while members.len() < size {
        let next = (0..n)
            .filter(|&i| !picked[i])
            .map(|i| {
                let worst = members
                    .iter()
                    .map(|&m| corr[i][m])
                    .fold(f64::NEG_INFINITY, f64::max);
                (i, worst)
            })
            .reduce(|best, cur| if better(cur.1, cur.0, best.1, best.0) { cur } else { best })
            .map(|(i, _)| i)
            .expect("fewer members than candidates");
        picked[next] = true;
        members.push(next);
    }

    Ok(Ensemble {
        members: members.into_iter().map(|i| candidates[i].clone()).collect(),
        spec: EnsembleSpec {
            size,
            complexity_cap,
        },
    })
}

/// Median/spread of member predictions per row. Non-finite member outputs
/// are excluded from both statistics; a row where every member is
/// non-finite yields `None`.
pub fn ensemble_predict(
    ensemble: &Ensemble,
    rows: &[Vec<f64>],
) -> Result<Vec<Option<PredictionBand>>> {
    let width = ensemble
        .members
        .first()
        .map(|m| m.data_variables.len())
        .ok_or_else(|| Error::input("ensemble has no members"))?;
    if let Some(row) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::input(format!(
            "row width {} does not match the {width}-variable schema",
            row.len()
        )));
    }
    rows.par_iter()
        .map(|row| {
            let mut outputs = Vec::with_capacity(ensemble.members.len());
            for member in &ensemble.members {
                let y = member.tree.eval(row)?;
                if y.is_finite() {
                    outputs.push(y);
                }
            }
            // Sorting first makes both statistics exactly invariant under
            // member reordering (summation order would otherwise leak in).
            outputs.sort_by(f64::total_cmp);
            Ok((!outputs.is_empty()).then(|| PredictionBand {
                point: fitness::median(&outputs),
                spread: fitness::pop_std(&outputs),
            }))
        })
        .collect()
}

/// Per-member quality on a held-out set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberReport {
    pub expression: String,
    pub complexity: u64,
    pub train_error: f64,
    pub test_error: f64,
}

/// Ensemble evaluation against a dataset: the member triple table, the
/// normalized RMSE of the median prediction, and per-row bands.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleReport {
    /// RMSE of the ensemble point prediction divided by the observed range.
    pub normalized_rmse: f64,
    pub members: Vec<MemberReport>,
    /// One band per dataset row, `None` where every member was non-finite.
    pub bands: Vec<Option<PredictionBand>>,
}

/// Evaluates the ensemble on `test`. Train errors are the archived member
/// qualities; test errors and the normalized RMSE are computed here. Rows
/// with no valid prediction are excluded from the RMSE.
pub fn evaluate_ensemble(ensemble: &Ensemble, test: &AlignedDataset) -> Result<EnsembleReport> {
    let members = ensemble
        .members
        .par_iter()
        .map(|m| {
            let pred = m.predict(&test.rows)?;
            Ok(MemberReport {
                expression: m.expression_text(),
                complexity: m.quality.complexity,
                train_error: m.quality.error,
                test_error: scaled_correlation_error(&pred, &test.response)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bands = ensemble_predict(ensemble, &test.rows)?;
    let mut points = Vec::with_capacity(test.len());
    let mut observed = Vec::with_capacity(test.len());
    for (band, obs) in bands.iter().zip(&test.response) {
        if let Some(band) = band {
            points.push(band.point);
            observed.push(*obs);
        }
    }
    if points.is_empty() {
        return Err(Error::input(
            "every ensemble prediction on the test set was non-finite",
        ));
    }
    Ok(EnsembleReport {
        normalized_rmse: normalized_rmse(&points, &observed)?,
        members,
        bands,
    })
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    spec: EnsembleSpec,
    variables: Vec<String>,
    variable_ranges: Vec<Interval>,
    members: Vec<ModelRecord>,
}

impl Ensemble {
    pub fn save(&self, path: &Path) -> Result<()> {
        let (variables, variable_ranges) = shared_schema(&self.members)?;
        crate::evolution::write_json(
            path,
            &EnsembleFile {
                spec: self.spec,
                variables,
                variable_ranges,
                members: self.members.iter().map(to_record).collect(),
            },
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: EnsembleFile = crate::evolution::read_json(path)?;
        let members = file
            .members
            .iter()
            .map(|r| from_record(r, &file.variables, &file.variable_ranges))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = BTreeSet::new();
        for member in &members {
            if member.quality.complexity > file.spec.complexity_cap {
                return Err(Error::input(format!(
                    "stored member '{}' exceeds the recorded complexity cap",
                    member.expression_text()
                )));
            }
            if !seen.insert(member.expression_text()) {
                return Err(Error::input("stored ensemble contains duplicate members"));
            }
        }
        Ok(Ensemble {
            members,
            spec: file.spec,
        })
    }
}
