//! Scenario configuration, presets, single runs and parameter sweeps.

pub mod config;
pub mod presets;
pub mod run;
pub mod sweep;

pub use config::{
    parse_config, parse_document, ConfigDocument, ConfigError, MeasureSettings, OutputSettings, ScenarioConfig,
};
pub use presets::{preset, PresetId};
pub use run::{run_scenario, write_abort_summary, RunError, RunOutput, Summary, TRAJECTORY_COLUMNS};
pub use sweep::{parse_sweep, run_sweep, SweepAxis, SweepParam, SweepPlan, SweepSpec, SweepTable};
