use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] lsigma::Error),

    #[error("oracle found {found} above the certified dual value {dual}")]
    OracleExceeds { found: f64, dual: f64, report: serde_json::Value },
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Core(lsigma::Error::CertificateGap { .. }) | CliError::OracleExceeds { .. } => 3,
            CliError::Invalid(_) | CliError::Core(_) => 2,
        }
    }

    /// JSON to print alongside the message, when the failure carries one.
    pub fn payload(&self) -> Option<serde_json::Value> {
        match self {
            CliError::Core(lsigma::Error::CertificateGap { certificate, .. }) => serde_json::to_value(certificate).ok(),
            CliError::OracleExceeds { report, .. } => Some(report.clone()),
            _ => None,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
