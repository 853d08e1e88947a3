use thiserror::Error;

/// Errors raised by the simulation and verification toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HawkesError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("excitation sum diverges: partial sum {partial} exceeds cap {cap}")]
    DivergentExcitation { partial: f64, cap: f64 },

    #[error("bracketing search exceeded time cap {cap} (cumulative intensity reached {reached}, target {target})")]
    UnboundedSearch { cap: f64, reached: f64, target: f64 },

    #[error("root finding failed to converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("integrity check failed at event {index}: recomputed {recomputed}, recorded {recorded}")]
    Integrity {
        index: usize,
        recomputed: f64,
        recorded: f64,
    },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("statistics error: {0}")]
    Statistics(String),
}

pub type Result<T> = std::result::Result<T, HawkesError>;
