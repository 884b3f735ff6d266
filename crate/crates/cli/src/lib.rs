//! Batch sweeps of pairwise concurrence with the CMF, exact and asymptotic methods.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, Method, RunConfig, Sweep};
pub use run::{run, Outcome, HEADER};
