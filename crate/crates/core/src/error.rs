//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by instance loading, parameter derivation, and the solver
/// pipeline. Infeasible LP subproblems are *not* errors (see
/// [`crate::lp::LpOutcome`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance file: {0}")]
    InstanceFile(String),

    #[error("parameter derivation requires n >= {min}, got n = {n}")]
    NTooSmall { n: usize, min: usize },

    #[error("epsilon must lie in (0, 0.25], got {0}")]
    EpsilonOutOfRange(f64),

    #[error("repetition count undefined: sqrt(epsilon) + 1/n = {0} >= 1")]
    RepetitionUndefined(f64),

    #[error("brute force limited to n <= {bound}, got n = {n}")]
    BruteForceTooLarge { n: usize, bound: usize },

    #[error("cost-budget check requires L(S*) > 0 and S subset of S*: {0}")]
    CostBudgetPrecondition(String),

    #[error("estimate noise |{0}| exceeds epsilon")]
    NoiseOutOfRange(f64),

    #[error("sampler size r = {r} exceeds cap {cap}")]
    SamplerCapExceeded { r: usize, cap: usize },

    #[error("estimate vector: {0}")]
    BadEstimates(String),

    #[error("edge-count guess {guess} outside [0, {max}]")]
    EGuessOutOfRange { guess: u64, max: u64 },

    #[error("LP solver: {0}")]
    Lp(String),

    #[error("driver: {0}")]
    Driver(String),

    #[error("generator: {0}")]
    Generator(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
