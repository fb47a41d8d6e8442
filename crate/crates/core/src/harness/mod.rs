//! Experiment runner and verification suites behind the command-line tool.

pub mod experiment;
pub mod verify;

pub use experiment::{
    config_hash, content_hash, run_config_file, run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport,
    ModelConfig, Row, SimDefaults,
};
pub use verify::{verify, Suite, VerifyReport};
