//! Command-line front end for `bellsim`: resolves a run configuration,
//! executes one command and writes a CSV plus a replayable manifest.

pub mod config;
pub mod emit;
pub mod error;
pub mod run;

pub use config::{parse_config, Command, RunConfig};
pub use error::{CliError, Result};
pub use run::{execute, run_and_emit, Outcome};
