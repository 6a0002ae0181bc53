//! Command-line harness for the `hhfd` solver: configuration, custom
//! problems, experiment sweeps and CSV/JSON output.

pub mod config;
pub mod custom;
pub mod error;
pub mod output;
pub mod run;

pub use config::{Flags, OutputFormat, ProblemKind, RunConfig};
pub use error::{CliError, Result};
pub use run::{execute, main_with_args, Outcome};
