//! Experiment driver: recall trials, error-rate tables, capacity search,
//! exhaustive fixed-point enumeration and result files.

mod emit;
mod experiment;
pub mod fixed_points;
mod trial;

pub use emit::{emit_results, read_results, write_results};
pub use experiment::{
    capacity_sweep, error_rate, run_trials, trial_rng, CapacityEstimate, CapacitySample,
    ErrorRateRow, ExperimentConfig, OutputFormat, PRange, CSV_HEADER,
};
pub use fixed_points::{audit_fixed_points, enumerate_fixed_points, FixedPointAudit};
pub use trial::{
    draw_instance, one_step_errors, one_step_trial, recall_trial, recall_trial_traced, TrialReport,
};
