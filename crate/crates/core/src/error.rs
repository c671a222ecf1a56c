use crate::index::MultiIndex;
use thiserror::Error;

/// Errors surfaced by model construction, propagation, and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("diffusion matrix entries ({i},{j}) and ({j},{i}) differ")]
    AsymmetricDiffusion { i: usize, j: usize },

    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("invalid run plan: {0}")]
    InvalidPlan(String),

    #[error("near-singular resolvent denominator at state {state}: |den| = {magnitude:e} (step size too large for this generator)")]
    SingularDiagonal { state: MultiIndex, magnitude: f64 },

    #[error("weight magnitude {magnitude:e} at step {step} exceeded the divergence guard")]
    Diverged { step: usize, magnitude: f64 },

    #[error("walk enumeration is limited to {max} steps, got {steps}")]
    WalkLimit { steps: usize, max: usize },

    #[error("walk enumeration only supports the explicit 1st-order scheme")]
    WalkScheme,

    #[error("missing shifted moment of order {0}")]
    MissingMoment(MultiIndex),

    #[error("extrapolation requires two distinct step counts")]
    EqualStepCounts,

    #[error("no closed form for moment order {0}; orders 1 and 2 are available")]
    UnsupportedOrder(u32),

    #[error("target order {alpha} lies outside the cutoff box (n_d < {cutoff})")]
    AlphaOutsideBox { alpha: MultiIndex, cutoff: u32 },

    #[error("the Monte Carlo oracle requires constant diffusion coefficients")]
    NonConstantDiffusion,

    #[error("diffusion matrix is not positive semidefinite")]
    NotPositiveSemidefinite,

    #[error("matrix is singular")]
    SingularMatrix,
}

pub type Result<T> = std::result::Result<T, Error>;
