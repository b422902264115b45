//! The generational loop: elitism, Pareto tournaments, variation, and
//! archive assembly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

use super::pareto::{pareto_tournament, select_by_layers};
use super::{EvolutionConfig, GpModel, Provenance, RunArchive};
use crate::data::AlignedDataset;
use crate::expr::{
    crossover, depth_preserving_mutation, random_model_tree, subtree_mutation, Expr, Primitive,
};
use crate::fitness::{self, scaled_correlation_error, QualityVector};
use crate::{Error, Result};

/// One member of the evolving population. Trees here are raw genotypes;
/// the affine output calibration is applied only when a run is archived.
#[derive(Clone, Debug)]
struct Individual {
    tree: Expr,
    complexity: u64,
    error: f64,
    age: u32,
    born: u64,
}

impl Individual {
    fn objectives(&self) -> Vec<f64> {
        vec![self.complexity as f64, self.error, self.age as f64]
    }
}

/// Per-generation summary handed to progress callbacks.
#[derive(Clone, Copy, Debug)]
pub struct GenerationStats {
    pub generation: u64,
    pub best_error: f64,
    pub front_size: usize,
    pub population_size: usize,
}

/// Runs one evolution and returns its archive. Identical inputs (dataset,
/// config, run id) produce identical archives when the stop criterion is
/// `max_generations`; a wall-clock budget trades that reproducibility for
/// a predictable runtime.
pub fn evolve(dataset: &AlignedDataset, config: &EvolutionConfig, run_id: u64) -> Result<RunArchive> {
    evolve_with_progress(dataset, config, run_id, |_| {})
}

/// [`evolve`] with a callback invoked after every completed generation.
pub fn evolve_with_progress(
    dataset: &AlignedDataset,
    config: &EvolutionConfig,
    run_id: u64,
    progress: impl Fn(GenerationStats),
) -> Result<RunArchive> {
    config.validate()?;
    check_trainable(dataset)?;

    let n_vars = dataset.input_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let trees: Vec<Expr> = (0..config.population_size)
        .map(|_| random_model_tree(&mut rng, n_vars, config.max_complexity))
        .collect();
    let mut population = build_individuals(trees, dataset, 0, 0)?;
    let mut elite: Vec<Individual> = Vec::new();

    let started = Instant::now();
    let mut generation = 0u64;
    loop {
        if let Some(limit) = config.max_generations {
            if generation >= limit {
                break;
            }
        }
        if let Some(budget) = config.time_budget_seconds {
            if started.elapsed().as_secs_f64() >= budget {
                break;
            }
        }
        generation += 1;

        elite = select_elite(&population, config.elite_size);
        let offspring = breed(&population, config, &mut rng, n_vars);
        let offspring = build_individuals_aged(offspring, dataset, generation)?;
        population = reduce(&elite, offspring, config.population_size);

        let stats = GenerationStats {
            generation,
            best_error: population
                .iter()
                .map(|m| m.error)
                .fold(f64::INFINITY, f64::min),
            front_size: front_size(&population),
            population_size: population.len(),
        };
        progress(stats);
    }

    let models = assemble_archive(&population, &elite, dataset, run_id)?;
    Ok(RunArchive {
        models,
        config: config.clone(),
        generations_completed: generation,
    })
}

/// Runs `config.independent_evolutions` evolutions in parallel, seeding run
/// `i` with `rng_seed + i` and using `i` as its run id. The callback may be
/// invoked concurrently across runs; archives come back in run order.
pub fn run_independent_evolutions(
    dataset: &AlignedDataset,
    config: &EvolutionConfig,
    progress: impl Fn(u64, GenerationStats) + Sync,
) -> Result<Vec<RunArchive>> {
    if config.independent_evolutions == 0 {
        return Err(Error::input("independent_evolutions must be at least 1"));
    }
    (0..config.independent_evolutions as u64)
        .into_par_iter()
        .map(|run_id| {
            let mut run_config = config.clone();
            run_config.rng_seed = config.rng_seed.wrapping_add(run_id);
            evolve_with_progress(dataset, &run_config, run_id, |stats| progress(run_id, stats))
        })
        .collect()
}

fn check_trainable(dataset: &AlignedDataset) -> Result<()> {
    if dataset.len() < 2 {
        return Err(Error::input(
            "evolution needs at least two training rows",
        ));
    }
    if dataset.input_count() == 0 {
        return Err(Error::input("evolution needs at least one input variable"));
    }
    if fitness::pop_std(&dataset.response) == 0.0 {
        return Err(Error::input(
            "response is constant over the training rows; nothing to model",
        ));
    }
    Ok(())
}

/// Evaluates trees against the dataset in parallel (order-preserving) and
/// pairs them with ages/birth generations.
fn build_individuals(
    trees: Vec<Expr>,
    dataset: &AlignedDataset,
    age: u32,
    born: u64,
) -> Result<Vec<Individual>> {
    build_individuals_aged(trees.into_iter().map(|t| (t, age)).collect(), dataset, born)
}

fn build_individuals_aged(
    trees: Vec<(Expr, u32)>,
    dataset: &AlignedDataset,
    born: u64,
) -> Result<Vec<Individual>> {
    trees
        .into_par_iter()
        .map(|(tree, age)| {
            let error = model_error(&tree, dataset)?;
            Ok(Individual {
                complexity: tree.complexity(),
                tree,
                error,
                age,
                born,
            })
        })
        .collect()
}

fn model_error(tree: &Expr, dataset: &AlignedDataset) -> Result<f64> {
    let predictions = predictions(tree, dataset)?;
    scaled_correlation_error(&predictions, &dataset.response)
}

fn predictions(tree: &Expr, dataset: &AlignedDataset) -> Result<Vec<f64>> {
    dataset.rows.iter().map(|row| tree.eval(row)).collect()
}

fn select_elite(population: &[Individual], elite_size: usize) -> Vec<Individual> {
    let objectives: Vec<Vec<f64>> = population.iter().map(Individual::objectives).collect();
    select_by_layers(&objectives, elite_size)
        .into_iter()
        .map(|i| population[i].clone())
        .collect()
}

/// Produces `population_size` child trees (with their inherited ages) via
/// Pareto tournaments and rate-dispatched variation.
fn breed(
    population: &[Individual],
    config: &EvolutionConfig,
    rng: &mut ChaCha8Rng,
    n_vars: usize,
) -> Vec<(Expr, u32)> {
    let objectives: Vec<Vec<f64>> = population.iter().map(Individual::objectives).collect();
    let crossover_cut = config.crossover_rate;
    let subtree_cut = crossover_cut + config.subtree_mutation_rate;
    let depth_cut = subtree_cut + config.depth_preserving_mutation_rate;

    let mut children = Vec::with_capacity(config.population_size);
    'filling: loop {
        let winners = pareto_tournament(&objectives, rng, config.tournament_size);
        for winner in winners {
            if children.len() == config.population_size {
                break 'filling;
            }
            let parent = &population[winner];
            let draw: f64 = rng.gen();
            let child = if draw < crossover_cut {
                let partner = pick_partner(&objectives, rng, config.tournament_size);
                crossover(
                    &parent.tree,
                    &population[partner].tree,
                    rng,
                    config.max_complexity,
                )
            } else if draw < subtree_cut {
                subtree_mutation(&parent.tree, rng, n_vars, config.max_complexity)
            } else if draw < depth_cut {
                depth_preserving_mutation(&parent.tree, rng, n_vars, config.max_complexity)
            } else {
                parent.tree.clone()
            };
            children.push((child, parent.age + 1));
        }
    }
    children
}

/// Crossover partners come from their own tournament; among several
/// nondominated winners one is drawn uniformly.
fn pick_partner(objectives: &[Vec<f64>], rng: &mut ChaCha8Rng, tournament_size: usize) -> usize {
    let winners = pareto_tournament(objectives, rng, tournament_size);
    winners[rng.gen_range(0..winners.len())]
}

/// Merges surviving elite with offspring, keeps the best `capacity` by
/// Pareto layers, and ages the survivors that came from the elite.
fn reduce(elite: &[Individual], offspring: Vec<Individual>, capacity: usize) -> Vec<Individual> {
    let mut merged: Vec<(Individual, bool)> = elite
        .iter()
        .cloned()
        .map(|m| (m, true))
        .chain(offspring.into_iter().map(|m| (m, false)))
        .collect();
    let objectives: Vec<Vec<f64>> = merged.iter().map(|(m, _)| m.objectives()).collect();
    let mut keep = select_by_layers(&objectives, capacity);
    keep.sort_unstable();
    keep.into_iter()
        .map(|i| {
            let (mut member, survived) = std::mem::replace(
                &mut merged[i],
                (
                    Individual {
                        tree: Expr::Const(0.0),
                        complexity: 1,
                        error: 1.0,
                        age: 0,
                        born: 0,
                    },
                    false,
                ),
            );
            if survived {
                member.age += 1;
            }
            member
        })
        .collect()
}

fn front_size(population: &[Individual]) -> usize {
    let objectives: Vec<Vec<f64>> = population.iter().map(Individual::objectives).collect();
    super::pareto::nondominated_sort(&objectives)
        .first()
        .map_or(0, Vec::len)
}

/// Final population plus the last elite, deduplicated by expression text,
/// each wrapped with its affine output calibration.
fn assemble_archive(
    population: &[Individual],
    elite: &[Individual],
    dataset: &AlignedDataset,
    run_id: u64,
) -> Result<Vec<GpModel>> {
    let mut seen = std::collections::BTreeSet::new();
    let unique: Vec<&Individual> = population
        .iter()
        .chain(elite)
        .filter(|m| seen.insert(m.tree.to_text(&dataset.variables)))
        .collect();
    unique
        .into_par_iter()
        .map(|member| {
            let raw_predictions = predictions(&member.tree, dataset)?;
            let tree = calibrated(&member.tree, &raw_predictions, &dataset.response);
            Ok(GpModel {
                quality: QualityVector {
                    complexity: tree.complexity(),
                    error: member.error,
                    age: member.age,
                },
                tree,
                data_variables: dataset.variables.clone(),
                variable_ranges: dataset.ranges.clone(),
                provenance: Provenance {
                    run_id,
                    generation_born: member.born,
                },
            })
        })
        .collect()
}

/// Wraps a raw genotype as `intercept + slope * raw` so the stored model
/// predicts in response units. Trees whose outputs cannot be scaled
/// (constant or non-finite predictions) get a zero slope and the observed
/// mean as intercept; their error stays 1 either way.
fn calibrated(raw: &Expr, raw_predictions: &[f64], observed: &[f64]) -> Expr {
    let (intercept, slope) = fitness::scaling_coefficients(raw_predictions, observed)
        .unwrap_or_else(|_| (fitness::mean(observed), 0.0));
    Expr::Op(
        Primitive::Plus,
        vec![
            Expr::Const(intercept),
            Expr::Op(Primitive::Times, vec![Expr::Const(slope), raw.clone()]),
        ],
    )
}
