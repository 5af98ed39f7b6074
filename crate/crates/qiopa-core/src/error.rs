//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Failure modes of builders, channels, and analytic evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Error {
    /// Input outside a function's mathematical domain (non-finite argument,
    /// non-convergent Gaussian parameters, reflectivity outside [0,1], ...).
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// Parameter combination the closed-form path does not cover.
    #[error("unsupported input: {0}")]
    Unsupported(&'static str),

    /// A truncated object missed its requested tail bound.
    #[error("truncation deficit {achieved:e} exceeds requested {requested:e}")]
    Truncation { requested: f64, achieved: f64 },

    /// Kraus set incomplete on the truncated space.
    #[error("Kraus completeness deficit {0:e}")]
    Completeness(f64),

    /// Density matrix failed a positivity or Hermiticity check.
    #[error("invalid state: {0}")]
    InvalidState(&'static str),

    /// POVM filtering removed essentially all state weight.
    #[error("degenerate filter: conclusive probability {0:e}")]
    DegenerateFilter(f64),

    /// Internal bookkeeping failure.
    #[error("internal error: {0}")]
    Internal(&'static str),
}
