//! Generates the bundled synthetic weather/power tables plus a matching
//! project config, so the full pipeline can be exercised without any
//! external data:
//!
//! ```text
//! cargo run -p symreg-cli --example make_synthetic -- demo
//! cargo run -p symreg-cli --bin symreg -- --config demo/config.json ingest
//! ```
//!
//! The generated weather table deliberately contains missing cells, an
//! unparsable timestamp, an off-cadence row, a duplicate timestamp, and a
//! free-text column, so the ingest step has real anomalies to clean.

use std::fs;
use std::path::PathBuf;

use symreg::synth::write_weather_fixture;
use symreg_cli::config::{DateRange, ProjectConfig};

fn main() -> symreg::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "demo".to_string()));
    fs::create_dir_all(&dir)?;
    let (weather, power) = write_weather_fixture(&dir, 2021, 28)?;

    let config = ProjectConfig {
        predictors_path: weather.clone(),
        response_path: power.clone(),
        predictors_format: Default::default(),
        response_format: Default::default(),
        missing_fraction_threshold: 0.25,
        train_range: DateRange {
            start: "2021-03-01".parse().expect("literal date"),
            end: "2021-03-22".parse().expect("literal date"),
        },
        test_range: DateRange {
            start: "2021-03-22".parse().expect("literal date"),
            end: "2021-03-29".parse().expect("literal date"),
        },
        evolution: symreg::evolution::EvolutionConfig {
            population_size: 150,
            max_generations: Some(15),
            time_budget_seconds: None,
            independent_evolutions: 4,
            rng_seed: 2021,
            ..Default::default()
        },
        stage1_selection: symreg::analysis::SelectionSpec {
            max_error: 0.5,
            max_complexity: 350,
            retain_fraction: 1.0,
        },
        stage2_selection: symreg::analysis::SelectionSpec {
            max_error: 0.5,
            max_complexity: 250,
            retain_fraction: 0.25,
        },
        stage2_variables: vec!["windGust2".to_string(), "dewPoint".to_string()],
        ensemble_size: 4,
        ensemble_complexity_cap: 150,
        out_dir: dir.join("out"),
    };
    let text = serde_json::to_string_pretty(&config).expect("config serializes");
    fs::write(dir.join("config.json"), text + "\n")?;

    println!("wrote {}", weather.display());
    println!("wrote {}", power.display());
    println!("wrote {}", dir.join("config.json").display());
    Ok(())
}
