//! Command-line runner for pairwise judge evaluation.
//!
//! The binary wires datasets, a configured judge backend, and the calibration
//! strategies into reproducible run directories: every run records its
//! resolved configuration, template checksums, and dataset hashes next to the
//! per-question records and the rendered report, so any reported number can
//! be re-derived offline.

use thiserror::Error;

pub mod config;
pub mod commands;
pub mod dataset;
pub mod report;
pub mod runs;

/// CLI failure modes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation (malformed flags or flag combinations).
    #[error("{0}")]
    Usage(String),
    /// The config file is missing, malformed, or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// Dataset files are missing, malformed, or referentially broken.
    #[error("dataset error: {0}")]
    Dataset(String),
    /// The judge backend failed (HTTP, credentials, cache miss).
    #[error("backend error: {0}")]
    Backend(String),
    /// Filesystem trouble writing or reading run artifacts.
    #[error("I/O error: {0}")]
    Io(String),
    /// The run finished but some questions produced no verdict.
    #[error("{failed} question(s) ended with every evidence chain unparseable")]
    Failures { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Dataset(_) => 3,
            CliError::Backend(_) => 4,
            CliError::Io(_) => 5,
            CliError::Failures { .. } => 6,
        }
    }
}

impl From<pairjudge_core::CalibrateError> for CliError {
    fn from(e: pairjudge_core::CalibrateError) -> Self {
        use pairjudge_core::CalibrateError::*;
        match e {
            Backend(inner) => CliError::from(inner),
            Template(inner) => CliError::Config(inner.to_string()),
            InvalidSettings(msg) => CliError::Config(msg),
            // Per-question exhaustion is handled inside the commands; one
            // escaping here means a single-cell entry point failed outright.
            AllChainsFailed { .. } => CliError::Backend(e.to_string()),
        }
    }
}

impl From<pairjudge_core::BackendError> for CliError {
    fn from(e: pairjudge_core::BackendError) -> Self {
        use pairjudge_core::BackendError::*;
        match &e {
            // A missing key or cache directory is an environment problem,
            // not a wire failure.
            MissingCredential(_) => CliError::Config(e.to_string()),
            CacheIo { .. } => CliError::Io(e.to_string()),
            _ => CliError::Backend(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
