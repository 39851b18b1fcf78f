//! Configuration ingestion, case orchestration, sweeps and reporting for the
//! `pkcert` binary.

pub mod config;
pub mod report;
pub mod run;

pub use config::{Format, RunConfig, Scenario};
pub use report::{compare_documents, Document};
pub use run::{demo_scenarios, SweepSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("mesh file: {0}")]
    Mesh(poincare_korn::Error),

    #[error("sweep parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("io: {0}")]
    Io(String),

    #[error("report: {0}")]
    Report(String),
}

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const MISMATCH: i32 = 3;
}
