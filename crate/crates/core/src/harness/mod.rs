//! Scenario configs, sweeps, and persisted run records.

pub mod config;
pub mod output;
pub mod run;

pub use config::{InitialStateRecipe, ScenarioConfig};
pub use output::{emit_outputs, EmitSummary, OutputFormats};
pub use run::{make_initial_state, merge_samples, run_scenario, RunRecord, Verdict};
