use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid channel data: {0}")]
    InvalidChannel(String),

    #[error("reference power must exceed 1, got {0}")]
    InvalidReferencePower(f64),

    #[error("shape mismatch: expected {expected} entries, got {got}")]
    ShapeError { expected: usize, got: usize },

    #[error("user index {index} out of range for {k} users")]
    IndexError { index: usize, k: usize },

    #[error("subset is empty or contains duplicates")]
    InvalidSubset,

    #[error("oracle limited to {limit} users, got {got}")]
    OracleLimitExceeded { limit: usize, got: usize },

    #[error("subset of {got} users exceeds the cap of {cap}")]
    SubsetTooLarge { cap: usize, got: usize },

    #[error("matching does not cover every user of the subset exactly once")]
    NotPerfect,

    #[error("target GDoF {d} of user {user} exceeds its direct strength {alpha}")]
    ImmediatelyInfeasible { user: usize, d: f64, alpha: f64 },

    #[error("GDoF tuple is infeasible")]
    InfeasibleGdof,

    #[error("auction stopped after {bids} bids without an equilibrium (infeasible target or epsilon too large)")]
    InfeasibleOrEpsilonTooLarge { bids: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{solver} did not converge in {iterations} iterations")]
    ConvergenceFailure { solver: &'static str, iterations: usize },

    #[error("dual iterations diverged at step {step} (residual {residual})")]
    DivergenceDetected { step: usize, residual: f64 },

    #[error("exact search supports at most {limit} users, got {got}; use the scheduling pipeline instead")]
    TooLargeForExact { limit: usize, got: usize },

    #[error("the TINA polytope of this subset is empty")]
    EmptyRegion,

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("path-loss distance must be positive, got {0}")]
    DomainError(f64),

    #[error("could not place a receiver inside the area after {0} attempts")]
    RegionTooTight(usize),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("input error: {0}")]
    Input(String),
}
