//! Command-line runner for the washboard toolkit: strict run specs,
//! artifact writing and manifests.

pub mod error;
pub mod manifest;
pub mod run;
pub mod spec;

pub use error::{ErrorRecord, ParseError, RunError, ValidationError};
pub use manifest::Manifest;
pub use run::run;
pub use spec::{parse_run_spec, RawSpec, RunSpec, Subcommand};
