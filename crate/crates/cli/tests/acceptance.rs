//! Acceptance suite: nine falsifiable end-to-end checks, one test per
//! criterion, with tolerances and wall-clock limits pinned as constants.
//! Each test prints a single summary line carrying the measured numbers
//! (visible under `--nocapture`); the harness line itself is the
//! pass/fail verdict.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use symreg::analysis::{
    filter_robust, select_model_set, variable_contribution, variable_presence, SelectionSpec,
};
use symreg::ensemble::{create_ensemble, ensemble_predict, evaluate_ensemble, PredictionBand};
use symreg::evolution::{
    evolve, merge_runs, nondominated_sort, run_independent_evolutions, EvolutionConfig,
};
use symreg::expr::{parse_expr, Interval};
use symreg::fitness::scaled_correlation_error;
use symreg::synth::{
    affine_recovery_dataset, driver_selection_dataset, extrapolation_benchmark, planted_superset,
    write_weather_fixture,
};
use symreg_cli::config::{DateRange, ProjectConfig};

// ---------------------------------------------------------------------
// 1. The reference linear model parses to a tree of complexity exactly 11.
// ---------------------------------------------------------------------

#[test]
fn acceptance_01_linear_model_complexity_is_exactly_11() {
    const LIMIT: Duration = Duration::from_millis(1);
    let names = vec!["windGust2".to_string()];
    let started = Instant::now();
    let tree = parse_expr("-25.2334 + 3.21666*windGust2", &names).unwrap();
    let complexity = tree.complexity();
    let elapsed = started.elapsed();
    assert_eq!(complexity, 11, "reference linear model complexity");
    assert!(elapsed < LIMIT, "took {elapsed:?}, limit {LIMIT:?}");
    println!("acceptance 01: complexity {complexity} == 11 in {elapsed:?}");
}

// ---------------------------------------------------------------------
// 2. The six reference ensemble expressions parse, match an independent
//    direct-arithmetic oracle at 100 random in-range points to 1e-9
//    relative, and interval screening finds none pathological over the
//    published data ranges (windGust2 in [0, 70], dewPoint in [-3.2, 19.1]).
// ---------------------------------------------------------------------

/// A hand-written f64 evaluation of one reference expression, taking
/// (windGust2, dewPoint).
type Oracle = fn(f64, f64) -> f64;

/// Direct-arithmetic transcriptions of the six reference expressions,
/// deliberately written against f64 operators rather than the expression
/// evaluator so the two routes stay independent.
fn reference_expressions() -> Vec<(&'static str, Oracle)> {
    vec![
        ("-32.1 + 2.9*(sqrt(windGust2) + windGust2)", |g, _d| {
            -32.1 + 2.9 * (g.sqrt() + g)
        }),
        (
            "112.0 - 3.5e-5*(-1956.3 + dewPoint^2 + windGust2^2)^2",
            |g, d| 112.0 - 3.5e-5 * (-1956.3 + d * d + g * g).powi(2),
        ),
        (
            "-6.4 + 1.3e-4*(9 - sqrt(windGust2))^2*windGust2^2\
             *(-9.9 + dewPoint + 2*windGust2)",
            |g, d| -6.4 + 1.3e-4 * (9.0 - g.sqrt()).powi(2) * g * g * (-9.9 + d + 2.0 * g),
        ),
        (
            "-4.5 + 4.3e-4*(-8.9 + sqrt(windGust2))*(-sqrt(windGust2) + 0.1*windGust2)\
             *windGust2*(-12 + dewPoint^2 + windGust2^2)",
            |g, d| {
                -4.5 + 4.3e-4
                    * (-8.9 + g.sqrt())
                    * (-g.sqrt() + 0.1 * g)
                    * g
                    * (-12.0 + d * d + g * g)
            },
        ),
        (
            "-3.1 + 1.5e-4*(-3*dewPoint*windGust2^2 + (9 - sqrt(windGust2))^2\
             *windGust2^2*(-16.3 + dewPoint + 2*windGust2))",
            |g, d| {
                -3.1 + 1.5e-4
                    * (-3.0 * d * g * g
                        + (9.0 - g.sqrt()).powi(2) * g * g * (-16.3 + d + 2.0 * g))
            },
        ),
        (
            "-11.2 + 9.4e-7*(9 - sqrt(windGust2))^2*sqrt(windGust2)\
             *(39.4 + 4*dewPoint + 7*windGust2)\
             *(1/9 + dewPoint + (10 + 2*windGust2)^2)",
            |g, d| {
                -11.2 + 9.4e-7
                    * (9.0 - g.sqrt()).powi(2)
                    * g.sqrt()
                    * (39.4 + 4.0 * d + 7.0 * g)
                    * (1.0 / 9.0 + d + (10.0 + 2.0 * g).powi(2))
            },
        ),
    ]
}

#[test]
fn acceptance_02_reference_expressions_match_direct_arithmetic() {
    const LIMIT: Duration = Duration::from_secs(1);
    const RELATIVE: f64 = 1e-9;
    const GUST_RANGE: (f64, f64) = (0.0, 70.0);
    const DEW_RANGE: (f64, f64) = (-3.2, 19.1);

    let started = Instant::now();
    let names = vec!["windGust2".to_string(), "dewPoint".to_string()];
    let ranges = [
        Interval::new(GUST_RANGE.0, GUST_RANGE.1),
        Interval::new(DEW_RANGE.0, DEW_RANGE.1),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let points: Vec<(f64, f64)> = (0..100)
        .map(|_| {
            (
                rng.gen_range(GUST_RANGE.0..=GUST_RANGE.1),
                rng.gen_range(DEW_RANGE.0..=DEW_RANGE.1),
            )
        })
        .collect();

    for (text, oracle) in reference_expressions() {
        let tree = parse_expr(text, &names).unwrap();
        for &(g, d) in &points {
            let got = tree.eval(&[g, d]).unwrap();
            let want = oracle(g, d);
            let scale = want.abs().max(1.0);
            assert!(
                (got - want).abs() <= RELATIVE * scale,
                "{text} at ({g}, {d}): evaluator {got} vs oracle {want}"
            );
        }
        let screened = tree.interval_eval(&ranges).unwrap();
        assert!(
            !screened.pathological,
            "{text} flagged pathological over the data ranges"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed < LIMIT, "took {elapsed:?}, limit {LIMIT:?}");
    println!("acceptance 02: 6 expressions x 100 points within 1e-9 in {elapsed:?}");
}

// ---------------------------------------------------------------------
// 3. Metric properties on 100 000 random vector pairs: the error lies in
//    [0, 1]; it is invariant to affine maps of the prediction to 1e-12;
//    a perfect prediction scores 0 (up to the sqrt rounding floor of the
//    correlation itself, well below 1e-14).
// ---------------------------------------------------------------------

#[test]
fn acceptance_03_metric_bounds_affine_invariance_and_perfect_score() {
    const LIMIT: Duration = Duration::from_secs(5);
    const PAIRS: usize = 100_000;
    const AFFINE_TOLERANCE: f64 = 1e-12;
    const IDENTITY_TOLERANCE: f64 = 1e-14;

    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut max_affine_delta: f64 = 0.0;
    let mut max_identity: f64 = 0.0;
    for _ in 0..PAIRS {
        let n = rng.gen_range(2..=64);
        let pred: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let obs: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();

        let err = scaled_correlation_error(&pred, &obs).unwrap();
        assert!((0.0..=1.0).contains(&err), "error {err} outside [0, 1]");

        let a = rng.gen_range(0.1..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b = rng.gen_range(-50.0..50.0);
        let mapped: Vec<f64> = pred.iter().map(|p| a * p + b).collect();
        let err_mapped = scaled_correlation_error(&mapped, &obs).unwrap();
        max_affine_delta = max_affine_delta.max((err_mapped - err).abs());

        max_identity = max_identity.max(scaled_correlation_error(&obs, &obs).unwrap());
    }
    assert!(
        max_affine_delta <= AFFINE_TOLERANCE,
        "affine invariance violated by {max_affine_delta:e}"
    );
    assert!(
        max_identity <= IDENTITY_TOLERANCE,
        "perfect prediction scored {max_identity:e}"
    );
    let elapsed = started.elapsed();
    assert!(elapsed < LIMIT, "took {elapsed:?}, limit {LIMIT:?}");
    println!(
        "acceptance 03: {PAIRS} pairs in [0,1], affine delta {max_affine_delta:.2e}, \
         identity {max_identity:.2e} in {elapsed:?}"
    );
}

// ---------------------------------------------------------------------
// 4. The fast nondominated sort agrees with an O(n²) peel-off oracle on
//    500 random 2-D and 3-D points, 100 trials each; half the trials snap
//    coordinates to a coarse grid so duplicate objectives are exercised.
// ---------------------------------------------------------------------

fn oracle_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn oracle_layers(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut layers = Vec::new();
    while !remaining.is_empty() {
        let layer: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| {
                !remaining
                    .iter()
                    .any(|&j| j != i && oracle_dominates(&points[j], &points[i]))
            })
            .collect();
        remaining.retain(|i| !layer.contains(i));
        layers.push(layer);
    }
    layers
}

#[test]
fn acceptance_04_nondominated_sort_matches_quadratic_oracle() {
    const LIMIT: Duration = Duration::from_secs(10);
    const TRIALS: usize = 100;
    const POINTS: usize = 500;

    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for dims in [2usize, 3] {
        for trial in 0..TRIALS {
            let snap = trial % 2 == 0;
            let points: Vec<Vec<f64>> = (0..POINTS)
                .map(|_| {
                    (0..dims)
                        .map(|_| {
                            let v: f64 = rng.gen_range(0.0..1.0);
                            if snap {
                                (v * 8.0).floor() / 8.0
                            } else {
                                v
                            }
                        })
                        .collect()
                })
                .collect();
            assert_eq!(
                nondominated_sort(&points),
                oracle_layers(&points),
                "{dims}-D trial {trial} (snap: {snap})"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < LIMIT, "took {elapsed:?}, limit {LIMIT:?}");
    println!("acceptance 04: {TRIALS} trials x 2/3-D x {POINTS} points in {elapsed:?}");
}

// ---------------------------------------------------------------------
// 5. Recovery benchmark: a single seeded evolution on y = -25.2334 +
//    3.21666·x with 2% noise (n = 500) reaches error 1 - R² <= 0.02, the
//    noise floor, within 50 generations.
// ---------------------------------------------------------------------

#[test]
fn acceptance_05_linear_recovery_reaches_the_noise_floor() {
    const LIMIT: Duration = Duration::from_secs(60);
    const ERROR_FLOOR: f64 = 0.02;

    let started = Instant::now();
    let data = affine_recovery_dataset(205, 500, 0.02);
    let config = EvolutionConfig {
        time_budget_seconds: None,
        max_generations: Some(50),
        independent_evolutions: 1,
        rng_seed: 505,
        ..EvolutionConfig::default()
    };
    let archive = evolve(&data, &config, 0).unwrap();
    let best = archive
        .models
        .iter()
        .map(|m| m.quality.error)
        .fold(f64::INFINITY, f64::min);
    assert!(
        best <= ERROR_FLOOR,
        "best archived error {best} above the {ERROR_FLOOR} noise floor"
    );
    let elapsed = started.elapsed();
    assert!(elapsed < LIMIT, "took {elapsed:?}, limit {LIMIT:?}");
    println!("acceptance 05: best error {best:.5} <= {ERROR_FLOOR} in {elapsed:?}");
}

// ---------------------------------------------------------------------
// 6. Feature selection: on 16 heavily correlated inputs with exactly two
//    drivers, the two-stage pipeline ranks both drivers top-2 by presence
//    and by contribution, and every non-driver's median contribution stays
//    below 10% of the weakest driver's.
// ---------------------------------------------------------------------

#[test]
fn acceptance_06_driver_selection_ranks_both_drivers_on_top() {
    const LIMIT: Duration = Duration::from_secs(900);
    const DRIVERS: [&str; 2] = ["x2", "x5"];
    const CONTRIBUTION_RATIO: f64 = 0.10;

    let started = Instant::now();
    let data = driver_selection_dataset(61, 600);
    let stage1_config = EvolutionConfig {
        population_size: 150,
        elite_size: 30,
        tournament_size: 15,
        max_complexity: 400,
        time_budget_seconds: None,
        max_generations: Some(25),
        independent_evolutions: 10,
        rng_seed: 6100,
        ..EvolutionConfig::default()
    };
    let archives = run_independent_evolutions(&data, &stage1_config, |_, _| {}).unwrap();
    let superset = merge_runs(&archives).unwrap();
    let robust = filter_robust(&superset, &data.ranges).unwrap();
    let set = select_model_set(
        &robust,
        SelectionSpec {
            max_error: 0.30,
            max_complexity: 350,
            retain_fraction: 1.0,
        },
    )
    .unwrap();

    let presence = variable_presence(&set).unwrap();
    let top_presence: BTreeSet<&str> =
        presence[..2].iter().map(|r| r.variable.as_str()).collect();
    assert_eq!(
        top_presence,
        DRIVERS.iter().copied().collect(),
        "presence top-2: {:?}",
        &presence[..4.min(presence.len())]
    );

    let contribution = variable_contribution(&set, &data).unwrap();
    let top_contribution: BTreeSet<&str> = contribution[..2]
        .iter()
        .map(|r| r.variable.as_str())
        .collect();
    assert_eq!(
        top_contribution,
        DRIVERS.iter().copied().collect(),
        "contribution top-2: {:?}",
        &contribution[..4.min(contribution.len())]
    );
    let weakest_driver = DRIVERS
        .iter()
        .map(|name| {
            contribution
                .iter()
                .find(|r| r.variable == *name)
                .expect("driver has a contribution row")
                .contribution
        })
        .fold(f64::INFINITY, f64::min);
    for row in &contribution {
        if !DRIVERS.contains(&row.variable.as_str()) {
            assert!(
                row.contribution < CONTRIBUTION_RATIO * weakest_driver,
                "non-driver {} contributes {} vs weakest driver {}",
                row.variable,
                row.contribution,
                weakest_driver
            );
        }
    }

    // Stage two re-runs the evolution restricted to the chosen drivers and
    // must still produce a selectable model set.
    let reduced = data
        .project(&DRIVERS.map(String::from))
        .expect("drivers exist in the schema");
    let stage2_config = EvolutionConfig {
        max_generations: Some(15),
        independent_evolutions: 2,
        rng_seed: 6200,
        ..stage1_config
    };
    let archives = run_independent_evolutions(&reduced, &stage2_config, |_, _| {}).unwrap();
    let superset = merge_runs(&archives).unwrap();
    let robust = filter_robust(&superset, &reduced.ranges).unwrap();
    let stage2 = select_model_set(
        &robust,
        SelectionSpec {
            max_error: 0.30,
            max_complexity: 250,
            retain_fraction: 0.25,
        },
    )
    .unwrap();
    assert!(!stage2.is_empty(), "stage-2 selection came back empty");

    let elapsed = started.elapsed();
    assert!(elapsed < LIMIT, "took {elapsed:?}, limit {LIMIT:?}");
    println!(
        "acceptance 06: drivers top-2, weakest driver {weakest_driver:.4}, \
         stage-2 set {} models in {elapsed:?}",
        stage2.len()
    );
}

// ---------------------------------------------------------------------
// 7. Ensemble behavior: prediction bands widen strictly on an
//    extrapolating split, and on an in-range split the ensemble's
//    normalized RMSE is no worse than its worst member's.
// ---------------------------------------------------------------------

fn mean_spread(bands: &[Option<PredictionBand>]) -> f64 {
    let spreads: Vec<f64> = bands.iter().flatten().map(|b| b.spread).collect();
    assert!(!spreads.is_empty(), "no valid bands");
    spreads.iter().sum::<f64>() / spreads.len() as f64
}

fn normalized_rmse(pred: &[f64], obs: &[f64]) -> f64 {
    let mse = pred
        .iter()
        .zip(obs)
        .map(|(p, o)| (p - o) * (p - o))
        .sum::<f64>()
        / obs.len() as f64;
    let (lo, hi) = obs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    mse.sqrt() / (hi - lo)
}

#[test]
fn acceptance_07_bands_widen_and_the_ensemble_beats_its_worst_member() {
    const LIMIT: Duration = Duration::from_secs(120);
    const ENSEMBLE_SIZE: usize = 4;
    const COMPLEXITY_CAP: u64 = 150;

    let started = Instant::now();
    let bench = extrapolation_benchmark(77);
    let config = EvolutionConfig {
        population_size: 120,
        elite_size: 24,
        tournament_size: 12,
        max_complexity: 200,
        time_budget_seconds: None,
        max_generations: Some(20),
        independent_evolutions: 3,
        rng_seed: 707,
        ..EvolutionConfig::default()
    };
    let archives = run_independent_evolutions(&bench.train, &config, |_, _| {}).unwrap();
    let superset = merge_runs(&archives).unwrap();
    let robust = filter_robust(&superset, &bench.train.ranges).unwrap();
    let set = select_model_set(
        &robust,
        SelectionSpec {
            max_error: 0.30,
            max_complexity: 350,
            retain_fraction: 1.0,
        },
    )
    .unwrap();
    let ensemble = create_ensemble(&set, &bench.train, ENSEMBLE_SIZE, COMPLEXITY_CAP).unwrap();

    let train_bands = ensemble_predict(&ensemble, &bench.train.rows).unwrap();
    let extrapolated_bands = ensemble_predict(&ensemble, &bench.extrapolated.rows).unwrap();
    let (train_spread, extrapolated_spread) =
        (mean_spread(&train_bands), mean_spread(&extrapolated_bands));
    assert!(
        extrapolated_spread > train_spread,
        "extrapolated spread {extrapolated_spread} not above train spread {train_spread}"
    );

    let report = evaluate_ensemble(&ensemble, &bench.in_range).unwrap();
    let worst_member = ensemble
        .members
        .iter()
        .map(|m| normalized_rmse(&m.predict(&bench.in_range.rows).unwrap(), &bench.in_range.response))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        report.normalized_rmse <= worst_member,
        "ensemble nRMSE {} above worst member {worst_member}",
        report.normalized_rmse
    );

    let elapsed = started.elapsed();
    assert!(elapsed < LIMIT, "took {elapsed:?}, limit {LIMIT:?}");
    println!(
        "acceptance 07: spread {train_spread:.3} -> {extrapolated_spread:.3}, \
         ensemble nRMSE {:.4} <= worst member {worst_member:.4} in {elapsed:?}",
        report.normalized_rmse
    );
}

// ---------------------------------------------------------------------
// 8. Determinism: the full scripted two-stage pipeline, run twice with the
//    same seed into different directories, produces byte-identical
//    artifacts everywhere.
// ---------------------------------------------------------------------

fn run_symreg(config: &Path, out: &Path, args: &[&str]) {
    let output = Command::new(env!("CARGO_BIN_EXE_symreg"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("symreg binary runs");
    assert!(
        output.status.success(),
        "symreg {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

/// All files under `root`, keyed by their relative path.
fn collect_artifacts(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, into: &mut Vec<(PathBuf, Vec<u8>)>) {
        let mut entries: Vec<_> = fs::read_dir(dir)
            .expect("artifact dir exists")
            .map(|e| e.expect("dir entry").path())
            .collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(root, &path, into);
            } else {
                let rel = path.strip_prefix(root).expect("under root").to_path_buf();
                into.push((rel, fs::read(&path).expect("artifact is readable")));
            }
        }
    }
    let mut files = Vec::new();
    walk(root, root, &mut files);
    files
}

#[test]
fn acceptance_08_scripted_pipeline_reruns_byte_identical() {
    const LIMIT: Duration = Duration::from_secs(300);
    const CHAIN: &[&[&str]] = &[
        &["ingest"],
        &["evolve", "--stage", "1"],
        &["select", "--stage", "1"],
        &["analyze", "--stage", "1"],
        &["evolve", "--stage", "2"],
        &["select", "--stage", "2"],
        &["analyze", "--stage", "2"],
        &["ensemble"],
        &["predict"],
        &["report"],
    ];

    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let (weather, power) = write_weather_fixture(dir.path(), 8, 21).unwrap();
    let config = ProjectConfig {
        predictors_path: weather,
        response_path: power,
        predictors_format: Default::default(),
        response_format: Default::default(),
        missing_fraction_threshold: 0.25,
        train_range: DateRange {
            start: "2021-03-01".parse().unwrap(),
            end: "2021-03-15".parse().unwrap(),
        },
        test_range: DateRange {
            start: "2021-03-15".parse().unwrap(),
            end: "2021-03-22".parse().unwrap(),
        },
        evolution: EvolutionConfig {
            population_size: 80,
            elite_size: 16,
            tournament_size: 10,
            max_complexity: 300,
            time_budget_seconds: None,
            max_generations: Some(8),
            independent_evolutions: 2,
            rng_seed: 808,
            ..EvolutionConfig::default()
        },
        stage1_selection: SelectionSpec {
            max_error: 0.5,
            max_complexity: 350,
            retain_fraction: 1.0,
        },
        stage2_selection: SelectionSpec {
            max_error: 0.5,
            max_complexity: 250,
            retain_fraction: 0.5,
        },
        stage2_variables: vec!["windGust2".to_string(), "dewPoint".to_string()],
        ensemble_size: 4,
        ensemble_complexity_cap: 150,
        out_dir: dir.path().join("unused"),
    };
    let config_path = dir.path().join("config.json");
    fs::write(
        &config_path,
        serde_json::to_string_pretty(&config).unwrap(),
    )
    .unwrap();

    let out_a = dir.path().join("out_a");
    let out_b = dir.path().join("out_b");
    for out in [&out_a, &out_b] {
        for step in CHAIN {
            run_symreg(&config_path, out, step);
        }
    }

    let (files_a, files_b) = (collect_artifacts(&out_a), collect_artifacts(&out_b));
    let names_a: Vec<&PathBuf> = files_a.iter().map(|(p, _)| p).collect();
    let names_b: Vec<&PathBuf> = files_b.iter().map(|(p, _)| p).collect();
    assert_eq!(names_a, names_b, "artifact sets differ");
    for ((path, bytes_a), (_, bytes_b)) in files_a.iter().zip(&files_b) {
        assert!(
            bytes_a == bytes_b,
            "artifact {} differs between identical reruns",
            path.display()
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed < LIMIT, "took {elapsed:?}, limit {LIMIT:?}");
    println!(
        "acceptance 08: {} artifacts byte-identical across reruns in {elapsed:?}",
        files_a.len()
    );
}

// ---------------------------------------------------------------------
// 9. Robust screening: of 100 planted models, the 20 with in-range
//    singularities are rejected and exactly the 80 safe ones retained; a
//    10 000-point grid oracle confirms every retained model stays finite.
// ---------------------------------------------------------------------

#[test]
fn acceptance_09_screening_retains_exactly_the_safe_models() {
    const LIMIT: Duration = Duration::from_secs(30);
    const GRID: usize = 100; // 100 x 100 = 10 000 oracle points

    let started = Instant::now();
    let planted = planted_superset(909);
    let retained = filter_robust(&planted.models, &planted.ranges).unwrap();
    assert_eq!(retained.len(), 80, "retained count");

    let safe_texts: BTreeSet<String> = planted
        .models
        .iter()
        .zip(&planted.safe)
        .filter(|(_, &safe)| safe)
        .map(|(m, _)| m.expression_text())
        .collect();
    let retained_texts: BTreeSet<String> =
        retained.iter().map(|m| m.expression_text()).collect();
    assert_eq!(retained_texts, safe_texts, "retained set differs from the safe set");

    let (a_range, b_range) = (&planted.ranges[0], &planted.ranges[1]);
    let grid: Vec<Vec<f64>> = (0..GRID)
        .flat_map(|i| {
            let a = a_range.lo + (a_range.hi - a_range.lo) * i as f64 / (GRID - 1) as f64;
            (0..GRID).map(move |j| {
                let b = b_range.lo + (b_range.hi - b_range.lo) * j as f64 / (GRID - 1) as f64;
                vec![a, b]
            })
        })
        .collect();
    for model in &retained {
        let predictions = model.predict(&grid).unwrap();
        assert!(
            predictions.iter().all(|p| p.is_finite()),
            "{} emitted a non-finite value on the grid",
            model.expression_text()
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed < LIMIT, "took {elapsed:?}, limit {LIMIT:?}");
    println!(
        "acceptance 09: 80/100 retained, {} grid points all finite in {elapsed:?}",
        GRID * GRID
    );
}
