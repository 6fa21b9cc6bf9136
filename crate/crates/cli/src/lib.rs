//! Experiment runner for the truncated chiral gap pipeline: configuration,
//! single runs, scaling suites and artifact emission.

pub mod config;
mod error;
pub mod pipeline;
pub mod run;
pub mod suite;
pub mod svg;

pub use config::{parse_config, ConfigError, ExperimentConfig, Mode};
pub use error::ExpError;
pub use pipeline::Pipeline;
pub use run::{run_experiment, verify_run, RunOutcome, VerifyReport};
pub use suite::{scaling_suite, suite_csv, Axis, SuiteRow};
pub use svg::render_svg;
