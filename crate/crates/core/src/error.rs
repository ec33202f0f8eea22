//! Error taxonomy shared by all computational modules.

use thiserror::Error;

/// Errors surfaced by the spectral/geometric computations.
///
/// The variants are deliberately coarse: callers dispatch on the failure
/// class (bad input, resource limit, numerical accuracy, geometric
/// degeneracy, internal inconsistency), while the payload carries the
/// human-readable detail.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("energy window exhausted: requested E={requested}, window extends to {limit}")]
    WindowExhausted { requested: f64, limit: f64 },

    #[error("degenerate Floquet multiplier at E={energy} (band edge)")]
    DegenerateMultiplier { energy: f64 },

    #[error("degenerate geometry at zeta={zeta}: {detail}")]
    DegenerateGeometry { zeta: f64, detail: String },

    #[error("geometry inconsistency: {0}")]
    GeometryInconsistency(String),

    #[error("accuracy target missed ({detail}); nodes used: {nodes}")]
    Accuracy { detail: String, nodes: usize },

    #[error("branch continuation accuracy: residual {residual:.3e} exceeds {limit:.3e}")]
    ContinuationAccuracy { residual: f64, limit: f64 },

    #[error("ambiguous period fit: {0}")]
    AmbiguousPeriodFit(String),

    #[error("crossing value {value} is not close to a multiple of pi")]
    InvalidCrossing { value: f64 },

    #[error("branch point count mismatch: argument principle counted {counted}, polishing found {found}")]
    BranchPointCount { counted: usize, found: usize },

    #[error("unsupported extremum/branch order {order}")]
    UnsupportedOrder { order: usize },

    #[error("matrix evaluator returned a non-finite entry at z={z}")]
    Evaluator { z: f64 },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
