//! Config-driven experiments with JSON, CSV and SVG output.

pub mod config;
pub mod registry;
mod run;
pub mod svg;

pub use config::{ExperimentConfig, GridSpec, OutputSpec, ProblemSpec, StudySpec};
pub use registry::{listing, ExperimentInfo, REGISTRY};
pub use run::{load_config, oracle_gap, output_dir, run_config, run_file, RunError, RunOptions, RunOutcome};
