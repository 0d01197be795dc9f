use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;
use washboard_core::Error as CoreError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("invalid value for `{key}`: {message}")]
pub struct ValidationError {
    pub key: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationError { key: key.into(), message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }

    /// Process exit status; each error family has its own code.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) => 3,
            RunError::Validation(_) => 4,
            RunError::Io { .. } => 10,
            RunError::Core(e) => match e {
                CoreError::UnsupportedFrustration(_) | CoreError::CellFormat { .. } | CoreError::Expression { .. } => 5,
                CoreError::SingularIncidence { .. }
                | CoreError::AsymmetricTarget { .. }
                | CoreError::NotPositiveDefinite
                | CoreError::CanonicalMismatch { .. } => 6,
                CoreError::DimensionMismatch { .. } | CoreError::Incommensurate { .. } | CoreError::BadSliceSpec(_) => 7,
                CoreError::NoConvergence { .. } | CoreError::RootBranchLost { .. } => 8,
                CoreError::InvalidConfig(_)
                | CoreError::NumericalBlowup { .. }
                | CoreError::NotPsd
                | CoreError::EmptyTrajectory
                | CoreError::MissingVelocities => 9,
                CoreError::InvalidArgument(_) => 11,
            },
        }
    }

    /// Short machine-readable name of the error.
    pub fn kind(&self) -> String {
        match self {
            RunError::Parse(_) => "ParseError".into(),
            RunError::Validation(_) => "ValidationError".into(),
            RunError::Io { .. } => "IOFailure".into(),
            RunError::Core(e) => {
                let dbg = format!("{e:?}");
                dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
            }
        }
    }
}

/// Record written as `error.json` when a run fails.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub code: i32,
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl From<&RunError> for ErrorRecord {
    fn from(e: &RunError) -> Self {
        let (key, line, column) = match e {
            RunError::Validation(v) => (Some(v.key.clone()), None, None),
            RunError::Parse(p) => (None, Some(p.line), Some(p.column)),
            _ => (None, None, None),
        };
        ErrorRecord { code: e.exit_code(), kind: e.kind(), message: e.to_string(), key, line, column }
    }
}
