use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("gate {gate} has repeated operand {qubit}")]
    DuplicateOperand { gate: String, qubit: usize },

    #[error("gate {gate} expects {expected} operand(s), got {got}")]
    OperandCount {
        gate: String,
        expected: usize,
        got: usize,
    },

    #[error("measurement cannot be applied as a unitary; use shot sampling instead")]
    MeasureNotUnitary,

    #[error("measurement ops must be the last ops of a circuit")]
    MeasureNotLast,

    #[error("register size mismatch: expected {expected} qubits, got {got}")]
    QubitCountMismatch { expected: usize, got: usize },

    #[error("{n_qubits} qubits exceeds the limit of {limit} for this operation")]
    TooManyQubits { n_qubits: usize, limit: usize },

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid basis label {0:?}")]
    InvalidLabel(String),

    #[error("unphysical calibration: {0}")]
    Unphysical(String),

    #[error("negative duration {0} s")]
    NegativeDuration(f64),

    #[error("no calibration entry for device qubit {0}")]
    MissingCalibration(usize),

    #[error("invalid coupling graph: {0}")]
    InvalidGraph(String),

    #[error("qubits {0} and {1} are not coupled")]
    NotAdjacent(usize, usize),

    #[error("invalid placement: {0}")]
    InvalidPlacement(String),

    #[error("unknown chain orientation {0} (expected 1..=4)")]
    UnknownOrientation(usize),

    #[error("unsupported construction: {0}")]
    Unsupported(String),

    #[error("X-gate reset needs a classically known control value: {0}")]
    SuperpositionReset(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from user-supplied configuration rather than a
    /// failure while running.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Json(_)
                | Error::Io { .. }
                | Error::InvalidGraph(_)
                | Error::Unphysical(_)
                | Error::MissingCalibration(_)
                | Error::UnknownOrientation(_)
                | Error::InvalidPlacement(_)
        )
    }
}
