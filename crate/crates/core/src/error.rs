use thiserror::Error;

/// Errors produced by the estimation pipeline and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series must contain at least 2 samples, got {0}")]
    TooShort(usize),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series length must be even, got {0}")]
    OddLength(usize),

    #[error("insufficient data for order: order {order} needs {needed} samples, got {got}")]
    InsufficientData {
        order: usize,
        needed: usize,
        got: usize,
    },

    #[error("degenerate prediction system (rank-deficient data matrix)")]
    DegeneratePrediction,

    #[error("Laguerre iteration from warm start {index} did not converge")]
    LaguerreDiverged { index: usize },

    #[error("underdetermined weight system: {nodes} nodes but only {rows} rows")]
    Underdetermined { nodes: usize, rows: usize },

    #[error("accurate pencil solve produced no eigenpairs")]
    EmptyBase,

    #[error("segment lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("coincident vertices at index {0}")]
    CoincidentVertices(usize),

    #[error("candidate region not covered by lattice (candidate {0})")]
    RegionNotCovered(usize),

    #[error("node at origin has no line interpretation")]
    NodeAtOrigin,

    #[error("zero minimum area")]
    ZeroArea,

    #[error("decimation factor {decimate} does not divide series length {len}")]
    Decimation { decimate: usize, len: usize },

    #[error("every sweep configuration failed: {}", .0.join("; "))]
    SweepFailed(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;
