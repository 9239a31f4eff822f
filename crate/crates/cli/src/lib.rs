//! Experiment pipelines behind the `qpc` binary: configuration, the
//! construct / gap / schrodinger / verify commands and the property suite.

pub mod commands;
pub mod config;
pub mod suite;

pub use commands::{cmd_construct, cmd_gap, cmd_schrodinger, cmd_verify, load_run, LoadedRun};
pub use config::RunConfig;
pub use suite::Check;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_MISSING: i32 = 4;
/// I/O and other unexpected errors.
pub const EXIT_OTHER: i32 = 1;

/// Error carrying the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn verify(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_VERIFY, message: msg.into() }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: msg.into() }
    }

    pub fn missing(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_MISSING, message: msg.into() }
    }

    pub fn other(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_OTHER, message: msg.into() }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}
