use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input data.
    Data,
    /// Hyper-parameters that cannot be satisfied by the data.
    Infeasible,
    /// Invalid arguments to an operation.
    Usage,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({row},{col}) is {value}, expected 0 or 1")]
    NotBinary { row: usize, col: usize, value: i64 },
    #[error("matrix is not symmetric at ({row},{col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("diagonal entry ({index},{index}) is nonzero")]
    NonzeroDiagonal { index: usize },
    #[error("vertex count {0} is too small, need at least 2")]
    VTooSmall(usize),
    #[error("edge ({u},{v}) is out of range for {n_vertices} vertices")]
    EdgeOutOfRange { u: usize, v: usize, n_vertices: usize },
    #[error("graph has {found} vertices, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset has {graphs} graphs but {labels} labels")]
    LabelCountMismatch { graphs: usize, labels: usize },
    #[error("class {0} has no samples")]
    EmptyClass(u8),
    #[error("input sample is empty")]
    EmptyInput,
    #[error("edge budget s={s} is outside 1..={max}")]
    SOutOfRange { s: usize, max: usize },
    #[error("vertex budget m={m} is outside 1..={max}")]
    MOutOfRange { m: usize, max: usize },
    #[error("s={s} edges cannot be incident to m={m} vertices (capacity {capacity})")]
    Infeasible { s: usize, m: usize, capacity: usize },
    #[error("k={k} is outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("fold {fold} leaves class {class} without training samples")]
    DegenerateFold { fold: usize, class: u8 },
    #[error("hyper-parameter grid is empty")]
    EmptyGrid,
    #[error("true signal-subgraph is empty")]
    EmptyTruth,
    #[error("relative rate undefined: coherent missed-edge rate is 1")]
    DivisionDegenerate,
    #[error("rate curves are not sampled on a common sample-size grid")]
    GridMismatch,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("invalid model specification: {0}")]
    InfeasibleSpec(String),
    #[error("nuisance probabilities cover {found} edges, expected {expected}")]
    MissingNuisance { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
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
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SOutOfRange { .. }
            | Error::MOutOfRange { .. }
            | Error::Infeasible { .. }
            | Error::KOutOfRange { .. }
            | Error::EmptyGrid
            | Error::InfeasibleSpec(_) => ErrorClass::Infeasible,
            Error::InvalidArgument(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), message: message.into() }
    }
}
