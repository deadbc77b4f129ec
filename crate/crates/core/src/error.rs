//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("non-finite intermediate at layer {layer}, neuron {neuron}")]
    NonFiniteNeuron { layer: usize, neuron: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scale limit exceeded: {0}")]
    ScaleLimit(String),

    #[error("hyperplane {index} has a zero weight vector")]
    ZeroHyperplane { index: usize },

    #[error("degenerate boundary: f vanishes on a full-dimensional region")]
    DegenerateBoundary,

    #[error("failed to sample a general-position arrangement in {attempts} attempts")]
    GeneralPositionRetries { attempts: usize },

    #[error("sweep resolution too coarse: run of length {run_len} at angle index {index}")]
    SweepResolution { run_len: usize, index: usize },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
