use serde::Serialize;

/// Errors of the experiment runner, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Bad flags or arguments (exit 1).
    #[error("usage: {0}")]
    Usage(String),
    /// Every problem found in the configuration (exit 1).
    #[error("configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    /// A check or estimator precondition failed at run time (exit 2).
    #[error("check `{}` failed: {}", .0.check, .0.detail)]
    Check(Failure),
}

/// Machine-readable description of a failed check, written as JSON.
#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub command: String,
    pub check: String,
    pub detail: String,
    pub values: serde_json::Value,
}

impl LabError {
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Check(_) => 2,
            _ => 1,
        }
    }

    pub fn check(command: &str, check: &str, detail: String, values: serde_json::Value) -> Self {
        LabError::Check(Failure { command: command.into(), check: check.into(), detail, values })
    }

    /// Core errors caused by parameter values are configuration errors;
    /// the rest are run-time check failures.
    pub fn from_core(command: &str, e: rcm_core::Error) -> Self {
        use rcm_core::Error::*;
        match e {
            InvalidModel(_) | Domain(_) | TooLarge(_) | Truncation(_) => LabError::Config(vec![e.to_string()]),
            Assumption(_) | Divergent(_) | InsufficientData(_) | Bracket(_) | Precondition(_) => {
                let check = match &e {
                    Assumption(_) => "assumption",
                    Divergent(_) => "divergent",
                    InsufficientData(_) => "insufficient-data",
                    Bracket(_) => "bracket",
                    _ => "precondition",
                };
                LabError::check(command, check, e.to_string(), serde_json::Value::Null)
            }
        }
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Io(std::io::Error::other(e))
    }
}
