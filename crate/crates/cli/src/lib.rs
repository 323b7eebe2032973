//! Command-line front end of the multi-group radiative transfer solver:
//! configuration files, experiment presets and CSV output.

pub mod config;
pub mod experiments;
pub mod output;
pub mod presets;

pub use config::{parse_config, ConfigError, RawConfig};
pub use experiments::{load, run_experiment, CliError, Options, Report, RunManifest};
