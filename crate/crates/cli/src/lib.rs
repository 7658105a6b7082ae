//! Command-line companion to `duobath-core`: structured run configuration,
//! named scenario presets, parameter sweeps, regular-vs-jittered control
//! comparison, filter-function emission, and a self-check suite. Everything
//! here is plumbing around the core numerics; all output is CSV time series
//! plus JSON sidecars, written atomically and byte-deterministic for a given
//! configuration.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;
pub mod validate;

pub use error::{CliError, CliResult};

/// Version stamped into every JSON sidecar.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
