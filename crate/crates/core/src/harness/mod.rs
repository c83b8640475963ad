//! Scenario configuration, execution and persistence for the `cdwork` CLI.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{CdMode, OutputKind, ScenarioConfig};
pub use presets::{preset, PRESET_NAMES};
pub use run::{run_scenario, RunResult};
