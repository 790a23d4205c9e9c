use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("CNOT control and target must differ (both were {0})")]
    SameControlTarget(usize),

    #[error("length mismatch: expected {expected}, got {actual} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid probability vector ({what}): {reason}")]
    NotASimplex { what: &'static str, reason: String },

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("empty batch or dataset")]
    Empty,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "non-finite loss at epoch {epoch}, batch {batch} (parameter norm {param_norm:.6e})"
    )]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        param_norm: f64,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("model was trained on benchmark `{model}`, not `{requested}`")]
    BenchmarkMismatch { model: String, requested: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input (flags, files, config) rather
    /// than by a failure during computation.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, Error::NonFiniteLoss { .. } | Error::Io { .. })
    }
}
