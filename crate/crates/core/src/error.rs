use std::fmt;
use std::path::PathBuf;

/// A single configuration problem, addressed by its dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("numerical failure: {message} (residual {residual:.3e})")]
    NumericalFailure { message: String, residual: f64 },

    #[error("unsupported component: {0}")]
    UnsupportedComponent(String),

    #[error("accuracy target missed: {message} (estimate {estimate:.3e}, tolerance {tolerance:.3e})")]
    Accuracy {
        message: String,
        estimate: f64,
        tolerance: f64,
    },

    #[error("configuration invalid:\n{}", format_issues(.0))]
    Validation(Vec<FieldIssue>),

    #[error("could not parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_issues(issues: &[FieldIssue]) -> String {
    issues.iter().map(|i| format!("  - {i}")).collect::<Vec<_>>().join("\n")
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
