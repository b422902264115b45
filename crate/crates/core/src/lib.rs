//! Multi-objective genetic-programming engine for symbolic regression.
//!
//! The crate is organised around a small expression language ([`expr`]),
//! a correlation-based fitness measure ([`fitness`]), a Pareto-archive
//! evolution engine ([`evolution`]), post-run model analysis and robustness
//! screening ([`analysis`]), ensemble construction ([`ensemble`]), and a
//! tabular data pipeline for two-cadence time series ([`data`]).
//!
//! All stochastic components draw from caller-supplied seeded RNGs and all
//! reported collections are deterministically ordered, so a run with a fixed
//! seed and a fixed generation budget reproduces byte-identical artifacts.

pub mod analysis;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod evolution;
pub mod expr;
pub mod fitness;
pub mod synth;

pub use error::{Error, Result};
