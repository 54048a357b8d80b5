//! Scenario files, the run engine behind the `wsurf` binary, and exports.

pub mod error;
pub mod expect;
pub mod export;
pub mod run;
pub mod scenario;
pub mod tables;

pub use error::{CliError, ParseError};
pub use run::{execute, RunArtifact, Status};
pub use scenario::{parse_scenario, Scenario};
