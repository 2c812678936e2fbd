//! Experiment runner for the cascaded photon-subtractor simulator: structured
//! configs in, deterministic CSV tables out.

pub mod config;
pub mod runner;
pub mod table;

pub use config::{parse_config, validate, Experiment, ExperimentConfig};
pub use runner::run;
pub use table::ResultTable;
