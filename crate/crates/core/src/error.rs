use std::path::PathBuf;

use thiserror::Error;

use crate::formula::IndexSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid window [{start},{end}]: {reason}")]
    InvalidWindow {
        start: i64,
        end: i64,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("formula has {0} sub-formulae; at most {max} are supported", max = IndexSet::CAPACITY)]
    TooManySubformulae(usize),

    #[error("instant {k} outside [0, {max}]")]
    InstantOutOfRange { k: usize, max: usize },

    #[error("{set} is not a potential index set at instant {k}")]
    NotPotential { k: usize, set: IndexSet },

    #[error("region atom `{0}` has no geometric definition")]
    UnboundAtom(String),

    #[error("input {input:?} outside the admissible input set at instant {k}")]
    InputOutOfDomain { k: usize, input: Vec<f64> },

    #[error("state {state:?} outside the state domain")]
    StateOutOfDomain { state: Vec<f64> },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("entry (k={k}, I={set}) exceeds the ceiling of {limit} boxes; increase eps")]
    ResourceCeiling { k: usize, set: IndexSet, limit: usize },

    #[error("grid of {cells} cells x {inputs} inputs exceeds the oracle ceiling of {limit}")]
    GridTooLarge {
        cells: usize,
        inputs: usize,
        limit: usize,
    },

    #[error("{what} digest mismatch: table has {found}, expected {expected}")]
    DigestMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("table has no entry for (k={k}, I={set})")]
    MissingEntry { k: usize, set: IndexSet },

    #[error("wrong table mode: expected {expected}, found {found}")]
    WrongMode {
        expected: &'static str,
        found: &'static str,
    },

    #[error("monitor already returned a terminal verdict at instant {0}")]
    MonitorTerminated(usize),

    #[error("monitor table inconsistency at instant {k}: {message}")]
    TableInconsistent { k: usize, message: String },

    #[error("trace row {row}: {message}")]
    Trace { row: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
