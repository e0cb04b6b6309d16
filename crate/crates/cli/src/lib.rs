//! Configuration, orchestration and artifact output for `fracmin`.

pub mod config;
pub mod plot;
pub mod run;

pub use config::{parse_config, serialize, ConfigError, ConfigErrors, ExperimentConfig};
pub use run::{run, Command, OutputLock, RunError, RunOptions, RunOutcome};
