//! Deterministic synthetic datasets for benchmarks, demos, and tests.
//!
//! Every generator is a pure function of its seed: the same inputs produce
//! byte-identical data on every platform.

use chrono::{NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::AlignedDataset;
use crate::evolution::{GpModel, Provenance};
use crate::expr::{parse_expr, Interval};
use crate::fitness::QualityVector;
use crate::Result;

/// Standard normal deviate via Box–Muller; only the cosine branch is used,
/// keeping the stream deterministic and dependency-free.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn half_hour_timestamps(rows: usize) -> Vec<NaiveDateTime> {
    let base = NaiveDate::from_ymd_opt(2021, 3, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    (0..rows)
        .map(|i| base + chrono::Duration::minutes(30 * i as i64))
        .collect()
}

fn pop_std(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Single-input recovery benchmark: `y = -25.2334 + 3.21666·x` over
/// x ∈ [0, 70], plus Gaussian noise with standard deviation equal to
/// `noise_fraction` of the clean response's spread.
pub fn affine_recovery_dataset(seed: u64, rows: usize, noise_fraction: f64) -> AlignedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.0..70.0)).collect();
    let clean: Vec<f64> = xs.iter().map(|x| -25.2334 + 3.21666 * x).collect();
    let noise_std = noise_fraction * pop_std(&clean);
    let response: Vec<f64> = clean
        .iter()
        .map(|y| y + noise_std * gaussian(&mut rng))
        .collect();
    AlignedDataset::new(
        vec!["x".to_string()],
        xs.into_iter().map(|x| vec![x]).collect(),
        response,
        half_hour_timestamps(rows),
        "y".to_string(),
        vec![format!("synthetic affine recovery, seed {seed}")],
    )
    .expect("generator invariants hold")
}

/// Sixteen heavily correlated inputs `x0..x15` of which exactly two drive
/// the response: `y = 0.4·x2² + 2.5·x5` plus 0.5% noise. The non-drivers
/// are noisy mixtures of the same two latent signals (plus a few pure-noise
/// columns), so they correlate with the drivers without carrying enough
/// signal to replace them.
pub fn driver_selection_dataset(seed: u64, rows: usize) -> AlignedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_vars = 16;
    // Per-column mixing weights for the two latent signals, fixed per seed.
    // Mixture weights are floored away from zero so every mixture visibly
    // correlates with a driver, while the mixture noise is large enough
    // that no mixture on its own (or any small combination) can model the
    // response as well as the drivers can.
    let mixes: Vec<(f64, f64, f64)> = (0..n_vars)
        .map(|i| match i {
            2 | 5 => (0.0, 0.0, 0.0), // drivers are handled explicitly
            13..=15 => (0.0, 0.0, 1.5), // pure noise columns
            _ => {
                let a = rng.gen_range(0.5..1.1) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let b = rng.gen_range(0.5..1.1) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                (a, b, rng.gen_range(4.0..5.0))
            }
        })
        .collect();
    let mut rows_out = Vec::with_capacity(rows);
    let mut response = Vec::with_capacity(rows);
    for t in 0..rows {
        let t = t as f64;
        let u = 5.0 + 4.0 * (0.13 * t).sin() + 2.0 * (0.041 * t + 1.0).sin();
        let v = 3.0 + 3.0 * (0.07 * t).cos() + 1.5 * (0.19 * t).sin();
        let mut row = vec![0.0; n_vars];
        for (i, &(a, b, s)) in mixes.iter().enumerate() {
            row[i] = match i {
                2 => u + 0.1 * gaussian(&mut rng),
                5 => v + 0.1 * gaussian(&mut rng),
                _ => a * u + b * v + s * gaussian(&mut rng),
            };
        }
        let y = 0.4 * row[2] * row[2] + 2.5 * row[5];
        rows_out.push(row);
        response.push(y);
    }
    let spread = pop_std(&response);
    for y in &mut response {
        *y += 0.005 * spread * gaussian(&mut rng);
    }
    AlignedDataset::new(
        (0..n_vars).map(|i| format!("x{i}")).collect(),
        rows_out,
        response,
        half_hour_timestamps(rows),
        "y".to_string(),
        vec![format!(
            "synthetic driver-selection benchmark, drivers x2 and x5, seed {seed}"
        )],
    )
    .expect("generator invariants hold")
}

/// Train/test material for ensemble behavior: training covers x ∈ [0, 50],
/// one test set stays inside that range, and one extrapolates to [50, 70].
pub struct SplitBenchmark {
    pub train: AlignedDataset,
    pub in_range: AlignedDataset,
    pub extrapolated: AlignedDataset,
}

/// Smooth single-driver response `y = 1.5·x + 0.02·x² + 4` with 1% noise,
/// split as described on [`SplitBenchmark`]. A second nuisance input gives
/// the evolution room to disagree off-range.
pub fn extrapolation_benchmark(seed: u64) -> SplitBenchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let build = |lo: f64, hi: f64, rows: usize, rng: &mut ChaCha8Rng| {
        let mut data = Vec::with_capacity(rows);
        let mut response = Vec::with_capacity(rows);
        for i in 0..rows {
            let x = lo + (hi - lo) * i as f64 / (rows - 1) as f64;
            let nuisance = (i as f64 * 0.23).sin() * 2.0 + rng.gen_range(-0.5..0.5);
            let y = 1.5 * x + 0.02 * x * x + 4.0;
            data.push(vec![x, nuisance]);
            response.push(y);
        }
        let spread = pop_std(&response);
        for y in &mut response {
            *y += 0.01 * spread * gaussian(rng);
        }
        AlignedDataset::new(
            vec!["x".to_string(), "w".to_string()],
            data,
            response,
            half_hour_timestamps(rows),
            "y".to_string(),
            vec![format!("synthetic extrapolation benchmark, seed {seed}")],
        )
        .expect("generator invariants hold")
    };
    SplitBenchmark {
        train: build(0.0, 50.0, 240, &mut rng),
        in_range: build(5.0, 45.0, 80, &mut rng),
        extrapolated: build(50.0, 70.0, 80, &mut rng),
    }
}

/// A superset with singularities planted inside the training ranges.
pub struct PlantedSuperset {
    pub models: Vec<GpModel>,
    /// Training ranges: a ∈ [1, 9], b ∈ [2, 8].
    pub ranges: Vec<Interval>,
    /// `safe[i]` is true when `models[i]` is finite everywhere in range.
    pub safe: Vec<bool>,
}

/// Builds 100 models over two inputs: 80 provably safe on the ranges and
/// 20 with reachable singularities (inverse and division through zero,
/// square roots of partially negative arguments).
pub fn planted_superset(seed: u64) -> PlantedSuperset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let variables = vec!["a".to_string(), "b".to_string()];
    let ranges = vec![Interval::new(1.0, 9.0), Interval::new(2.0, 8.0)];
    let mut bodies: Vec<(String, bool)> = Vec::with_capacity(100);
    for i in 0..80 {
        let c1 = 1.0 + (i % 7) as f64 + rng.gen_range(0.0..0.9);
        let c2 = 0.1 + rng.gen_range(0.0..2.0);
        let body = match i % 5 {
            // Polynomials and affine maps of bounded inputs are bounded.
            0 => format!("{c1:.3} + {c2:.3}*a"),
            1 => format!("{c1:.3}*a^2 - {c2:.3}*b"),
            2 => format!("(a + {c1:.3})*(b - {c2:.3})"),
            // sqrt stays safe: a ≥ 1, so a + c1 > 0.
            3 => format!("{c2:.3}*sqrt(a + {c1:.3})"),
            // inverse stays safe: b + c1 ≥ 3 > 0.
            _ => format!("{c2:.3}*inv(b + {c1:.3})"),
        };
        bodies.push((body, true));
    }
    for i in 0..20 {
        // Shift each singularity to a point strictly inside the ranges.
        let pivot_a = 1.5 + (i as f64) * 0.35; // within [1.5, 8.15] ⊂ [1, 9]
        let pivot_b = 2.5 + (i as f64) * 0.25; // within [2.5, 7.25] ⊂ [2, 8]
        let body = match i % 4 {
            0 => format!("inv(a - {pivot_a:.3})"),
            1 => format!("b/(a - {pivot_a:.3})"),
            2 => format!("sqrt(b - {pivot_b:.3})"),
            _ => format!("a/(b - {pivot_b:.3})"),
        };
        bodies.push((body, false));
    }
    let mut models = Vec::with_capacity(bodies.len());
    let mut safe = Vec::with_capacity(bodies.len());
    for (i, (body, ok)) in bodies.iter().enumerate() {
        let expression = format!("{:.3} + {:.3}*({body})", -2.0 + i as f64 * 0.1, 1.5);
        let tree = parse_expr(&expression, &variables).expect("template parses");
        models.push(GpModel {
            quality: QualityVector {
                complexity: tree.complexity(),
                error: 0.05 + 0.002 * i as f64,
                age: 0,
            },
            tree,
            data_variables: variables.clone(),
            variable_ranges: ranges.clone(),
            provenance: Provenance {
                run_id: 0,
                generation_born: 0,
            },
        });
        safe.push(*ok);
    }
    PlantedSuperset {
        models,
        ranges,
        safe,
    }
}

/// Raw CSV fixtures that exercise the whole ingestion path: a predictor
/// table on a half-hour cadence and a response table on a five-minute
/// cadence, with planted missing cells, a text column, a duplicated
/// timestamp, an unparseable timestamp, and an off-cadence row.
pub struct WeatherFixture {
    pub predictors_csv: String,
    pub response_csv: String,
}

/// Generates `days` of weather-like tables whose power response is driven
/// by `windGust2` and `dewPoint`; the remaining columns are correlated
/// bystanders. Cell-level anomalies are planted deterministically.
pub fn weather_tables(seed: u64, days: usize) -> WeatherFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = NaiveDate::from_ymd_opt(2021, 3, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    let gust = |t: f64| 35.0 + 20.0 * (t / 39.0).sin() + 8.0 * (t / 7.3 + 0.9).sin();
    let dew = |t: f64| 8.0 + 6.0 * (t / 53.0).cos() + 2.0 * (t / 11.0).sin();

    let mut predictors = String::from(
        "timestamp,temperature,dewPoint,windGust2,pressureQNH,observer note\n",
    );
    let half_hours = days * 48;
    for i in 0..half_hours {
        let t = i as f64;
        let ts = base + chrono::Duration::minutes(30 * i as i64);
        let g = (gust(t) + 0.8 * gaussian(&mut rng)).max(0.0);
        let d = dew(t) + 0.4 * gaussian(&mut rng);
        let temp = d + 6.0 + 1.5 * gaussian(&mut rng);
        let pressure = 1013.0 + 9.0 * (t / 97.0).sin() + 0.6 * gaussian(&mut rng);
        // Planted anomalies at fixed offsets.
        let dew_cell = if i % 97 == 5 {
            "-".to_string()
        } else {
            format!("{d:.2}")
        };
        let temp_cell = if i % 83 == 11 {
            String::new()
        } else {
            format!("{temp:.2}")
        };
        let ts_cell = if i == 33 {
            "not-a-time".to_string()
        } else if i == 50 {
            // Off the half-hour cadence; alignment must skip it.
            (ts + chrono::Duration::minutes(7)).format("%Y-%m-%dT%H:%M:%S").to_string()
        } else {
            ts.format("%Y-%m-%dT%H:%M:%S").to_string()
        };
        predictors.push_str(&format!(
            "{ts_cell},{temp_cell},{dew_cell},{g:.2},{pressure:.2},calm\n"
        ));
        if i == 70 {
            // Duplicate timestamp with different readings; first one wins.
            predictors.push_str(&format!(
                "{},{:.2},{:.2},{:.2},{:.2},gusty\n",
                ts.format("%Y-%m-%dT%H:%M:%S"),
                temp + 9.0,
                d + 9.0,
                g + 9.0,
                pressure + 9.0
            ));
        }
    }

    let mut response = String::from("timestamp,power\n");
    let five_minutes = days * 288;
    for i in 0..five_minutes {
        let ts = base + chrono::Duration::minutes(5 * i as i64);
        let t = i as f64 / 6.0; // express in half-hour units
        let g = gust(t).max(0.0);
        let d = dew(t);
        let power = 0.025 * g * g + 1.2 * d + 3.0 + 0.6 * gaussian(&mut rng);
        response.push_str(&format!(
            "{},{power:.3}\n",
            ts.format("%Y-%m-%dT%H:%M:%S")
        ));
    }
    WeatherFixture {
        predictors_csv: predictors,
        response_csv: response,
    }
}

/// Writes the weather fixture to `dir` and returns the two file paths.
pub fn write_weather_fixture(
    dir: &std::path::Path,
    seed: u64,
    days: usize,
) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let fixture = weather_tables(seed, days);
    let predictors = dir.join("weather.csv");
    let response = dir.join("power.csv");
    std::fs::write(&predictors, fixture.predictors_csv)?;
    std::fs::write(&response, fixture.response_csv)?;
    Ok((predictors, response))
}
