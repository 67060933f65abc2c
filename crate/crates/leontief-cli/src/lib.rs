//! File ingestion, report emission and condensation export around
//! `leontief-core`.

pub mod analysis;
pub mod dot;
pub mod economy;
pub mod report;

pub use analysis::{is_input_error, run_analysis, AnalysisOptions, NormalizeOption};
pub use dot::export_dot;
pub use economy::{parse_economy, EconomyFile, PayloadKind};
pub use report::Report;

/// CLI-level errors. Input problems exit with status 2, numerical failures
/// with status 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] leontief_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
