//! IO, file formats, and the command-line surface for the `tsmb-core`
//! classifiers.
//!
//! The core crate holds the models and the evaluation protocol; this crate
//! holds everything that touches a filesystem or a terminal: `.ts`/CSV
//! dataset parsing, JSON model bundles, benchmark reports and their CSV
//! companions, and the `tsmb` binary's subcommands.

#![forbid(unsafe_code)]
#![warn(missing_docs)]

pub mod bundle;
pub mod commands;
pub mod config;
pub mod formats;
pub mod report;
pub mod util;

/// A command-line failure, split by exit code.
///
/// Exit codes are a stable contract: 0 success, 1 data/IO error,
/// 2 usage error.
#[derive(Debug)]
pub enum CliError {
    /// The invocation itself is wrong (exit 2): bad flags, unknown scheme,
    /// missing seed, invalid grid bounds.
    Usage(String),
    /// The invocation is fine but the data is not (exit 1): unreadable or
    /// malformed files, datasets that violate model preconditions.
    Data(String),
}

impl CliError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(message) | CliError::Data(message) => f.write_str(message),
        }
    }
}

impl std::error::Error for CliError {}

impl From<formats::FormatError> for CliError {
    fn from(e: formats::FormatError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<bundle::BundleError> for CliError {
    fn from(e: bundle::BundleError) -> Self {
        CliError::Data(e.to_string())
    }
}
