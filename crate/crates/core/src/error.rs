use thiserror::Error;

/// Errors produced by the valuation, aggregation and planning routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("cycle discount product {product} >= 1: only finite-horizon valuation is defined")]
    DivergentCycle { product: f64 },

    #[error("discounted transition operator has spectral radius {radius} >= 1")]
    Divergent { radius: f64 },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("trajectory inconsistent with dynamics: {0}")]
    InconsistentTrajectory(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("aggregate discount normalization divides by a zero weight sum")]
    ZeroWeightSum,

    #[error("aggregate discount is zero at state {state}, action {action}")]
    ZeroAggregateDiscount { state: usize, action: usize },

    #[error("induced chain has {classes} closed classes; stationary distribution is not unique")]
    NonUniqueStationary { classes: usize },

    #[error("{what} exceeds cap: {count} > {cap}")]
    CapExceeded { what: &'static str, count: u128, cap: u128 },

    #[error("operation requires deterministic dynamics")]
    StochasticDynamics,

    #[error("no admissible tail candidate from state {state}")]
    NoTailCandidates { state: usize },

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
