use std::process::ExitCode;

use serde::Serialize;

/// Error with the exit code it maps to: 1 usage, 2 data, 3 internal.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Serialize)]
struct Report<'a> {
    kind: &'a str,
    message: String,
}

impl CliError {
    pub fn data(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
        CliError::Data(format!("{}: {e}", path.display()))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        })
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&serde_json::json!({
            "error": Report {
                kind: self.kind(),
                message: self.to_string(),
            }
        }))
        .expect("serializable")
    }
}
