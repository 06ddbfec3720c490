//! Config-driven experiment runner for kicked-top tomography simulations.
//!
//! A run reads an [`ExperimentConfig`], computes one [`MetricSeries`] per
//! swept parameter with `kicktomo-core`, and writes each as a CSV file next to
//! a JSON [`RunManifest`]. Equal configs and seeds give byte-identical CSVs.
//!
//! [`MetricSeries`]: kicktomo_core::series::MetricSeries

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod runner;

pub use config::{ConfigOverrides, Experiment, ExperimentConfig};
pub use error::RunError;
pub use manifest::RunManifest;
pub use runner::{compute, run, Computed, NamedSeries};
