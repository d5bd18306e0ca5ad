use thiserror::Error;

/// Failures while reading or validating a scenario document.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: `{field}` {reason}")]
    Validation { field: String, reason: String },
    #[error("cannot read scenario `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no bundled scenario named `{0}`")]
    UnknownBundled(String),
}

impl ScenarioError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("a path needs at least two points, got {0}")]
    TooShort(usize),
    #[error("path point {0} is not finite")]
    NonFinite(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RrtError {
    #[error("nearest-neighbor query on an empty tree")]
    EmptyTree,
}

/// Errors surfaced by the benchmark harness and CLI.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown algorithm `{0}` (expected multistage, drrt or mprrt)")]
    UnknownAlgorithm(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("I/O error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
