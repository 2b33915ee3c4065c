//! Configuration-driven runner for the checks in `equinuc-core`: JSON
//! configuration in, JSON report, optional CSV sweep and a text table out.

pub mod cli;
pub mod config;
pub mod report;
pub mod runner;

pub use cli::{execute, Cli};
pub use config::{parse_config, ConfigError, RunConfig, Task};
pub use report::RunReport;
pub use runner::{run, RunOptions};
