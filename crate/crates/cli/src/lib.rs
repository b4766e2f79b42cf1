//! Command-line front end: point transforms, property suites, tracking
//! simulation, α fits and comparison reports, with run manifests.

use std::fmt;

pub mod commands;
pub mod manifest;
pub mod suites;

/// Bad flags or environment. Maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
