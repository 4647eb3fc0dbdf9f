//! Exit codes and the machine-readable error report.

use pointwave::Error;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Config,
    Solver,
    Invariant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
    /// Names of violated invariants, if any.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { kind: FailureKind::Config, message: message.into(), violations: Vec::new() }
    }

    pub fn invariant(violations: Vec<String>) -> Self {
        Failure { kind: FailureKind::Invariant, message: format!("{} invariant(s) violated", violations.len()), violations }
    }

    pub fn from_config(e: Error) -> Self {
        Failure::config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Config => EXIT_CONFIG,
            FailureKind::Solver => EXIT_SOLVER,
            FailureKind::Invariant => EXIT_INVARIANT,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a Failure,
            exit_code: i32,
        }
        serde_json::to_string(&Report { error: self, exit_code: self.exit_code() }).expect("plain data serializes")
    }
}

/// Errors raised after validation: bad inputs the library caught are still
/// configuration errors, file errors stay configuration errors, and the rest
/// are solver failures.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::InvalidArgument(_) | Error::Domain(_) | Error::MetricMismatch(_) | Error::Io(_) | Error::Parse(_) => FailureKind::Config,
            _ => FailureKind::Solver,
        };
        Failure { kind, message: e.to_string(), violations: Vec::new() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::config(format!("io error: {e}"))
    }
}
