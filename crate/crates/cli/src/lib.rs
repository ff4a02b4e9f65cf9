//! Experiment runner for the `netinf` command line tool: config files,
//! dispatch to the core library, and reproducible result files.

pub mod config;
pub mod output;
pub mod run;

pub use config::{validate, Config, ConfigErrors, ConfigIssue, Experiment, Plan, Settings};
pub use output::RunOutputs;
pub use run::{execute, run, run_from_text, Overrides, Results, RunError};
