//! Scenario files, random scenario generation and batch experiments.

pub mod experiment;
pub mod random;
pub mod scenario_file;

pub use experiment::{
    emit_polar_csv, polar_csv, reciprocity_csv, run_experiment, s21_campaign, ArtifactWriter,
    ConfigSource, CsvMeta, Experiment, ExperimentSpec, RunOutcome, S21Row,
};
pub use random::{random_case, random_scenario, rng_for};
pub use scenario_file::{
    parse_scenario, parse_scenario_file, parse_scenario_with, scenario_to_text, ParseOptions,
    TABLE_PATH_ENV,
};
