//! `symreg` — batch driver for the two-stage symbolic-regression pipeline.
//!
//! Exit codes: 0 on success, 2 on input/usage errors, 3 when a required
//! upstream artifact is missing (run the earlier subcommand first).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symreg::Error;
use symreg_cli::commands::{self, Stage};
use symreg_cli::config::ProjectConfig;

#[derive(Parser)]
#[command(
    name = "symreg",
    version,
    about = "Two-stage symbolic-regression modeling pipeline",
    after_help = "Typical run order: ingest, evolve, select, analyze, \
                  evolve --stage 2, select --stage 2, ensemble, predict, report."
)]
struct Cli {
    /// Project configuration file (JSON).
    #[arg(
        long,
        global = true,
        value_name = "PATH",
        default_value = "config.json"
    )]
    config: PathBuf,
    /// Overrides the evolution seed from the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides the output directory from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Stops every evolution after N generations instead of the configured
    /// wall-clock budget; a generation cap makes runs reproducible.
    #[arg(long, global = true, value_name = "N")]
    max_generations: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArg {
    /// Pipeline stage to operate on.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    stage: u8,
}

impl StageArg {
    fn stage(&self) -> Stage {
        if self.stage == 2 {
            Stage::Two
        } else {
            Stage::One
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse, screen, align, and date-split the raw tables into datasets.
    Ingest,
    /// Run the independent evolutions; write per-run archives and the superset.
    Evolve(StageArg),
    /// Screen the superset for robustness and select the model set.
    Select(StageArg),
    /// Write presence, contribution, niche, and Pareto tables for a stage.
    Analyze(StageArg),
    /// Build the ensemble from the final stage and write the member table.
    Ensemble,
    /// Write per-row ensemble prediction bands for the test split.
    Predict,
    /// Bundle summary, Pareto scatter, and predicted-vs-actual data.
    Report,
}

fn run(cli: Cli) -> symreg::Result<()> {
    let mut config = ProjectConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.evolution.rng_seed = seed;
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(generations) = cli.max_generations {
        config.evolution.max_generations = Some(generations);
        config.evolution.time_budget_seconds = None;
    }
    config.validate()?;

    match cli.command {
        Command::Ingest => commands::cmd_ingest(&config),
        Command::Evolve(arg) => commands::cmd_evolve(&config, arg.stage()),
        Command::Select(arg) => commands::cmd_select(&config, arg.stage()),
        Command::Analyze(arg) => commands::cmd_analyze(&config, arg.stage()),
        Command::Ensemble => commands::cmd_ensemble(&config),
        Command::Predict => commands::cmd_predict(&config),
        Command::Report => commands::cmd_report(&config),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::MissingArtifact(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
