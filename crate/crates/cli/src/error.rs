use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] market_learn::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("no simulation results to plot")]
    MissingResults,
    #[error("{failed} hard verification check(s) failed")]
    VerifyFailed { failed: usize },
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: &'a str,
    message: String,
    exit_code: u8,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Model(_) => "validation",
            CliError::Usage(_) => "usage",
            CliError::Read { .. } => "read",
            CliError::Write { .. } | CliError::Csv(_) => "write",
            CliError::MissingResults => "missing_results",
            CliError::VerifyFailed { .. } => "verify_failed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed { .. } => 2,
            _ => 1,
        }
    }

    pub fn report(&self, json: bool) {
        if json {
            let doc = ErrorDoc {
                error: self.kind(),
                message: self.to_string(),
                exit_code: self.exit_code(),
            };
            eprintln!(
                "{}",
                serde_json::to_string(&doc).expect("error document serializes")
            );
        } else {
            eprintln!("error: {self}");
        }
    }
}
