//! Evaluation protocols, experiment configuration and report emission.

mod config;
mod probe;
mod report;
mod run;

pub use config::{
    parse_document, parse_scalar, training_defaults, with_value, AugviewConfig, CrossPersonConfig, Dataset, ExperimentConfig,
    GridConfig, Protocol, TrainingDefaults, WindowSweepConfig, AUG_PAIRS,
};
pub use probe::{
    accuracy, extract_features, linear_evaluate, parameter_checksum, probe_encoder, LinearHead, ProbeConfig, ProbeResult,
    ProbeScores,
};
pub use report::{Audit, EpochLog, Grid, MetricRow, RunReport};
pub use run::{augview, checkpoint_path, load_data, thread_cap, window_geometry, DataSource, Runner};

#[cfg(test)]
mod tests;
