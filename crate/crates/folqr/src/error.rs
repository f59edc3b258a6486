use thiserror::Error;

/// Error type shared across the toolkit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument failed a precondition (non-finite, wrong sign, length mismatch, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Evaluation was requested outside the declared convergence domain of a
    /// special function, or inside it but beyond the precision budget.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Riccati iteration did not produce a stabilizing solution within budget.
    #[error(
        "riccati solver failure after {iterations} iterations (residual {residual:.3e}): {detail}"
    )]
    SolverFailure {
        residual: f64,
        iterations: usize,
        detail: String,
    },

    /// The per-step closed-loop equation became singular.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// An operation that requires a non-diverged simulation was given a diverged one.
    #[error("invalid state: simulation diverged, {0}")]
    DivergedState(String),

    /// Every candidate across every generation was penalized.
    #[error("tuning failure: no feasible individual found ({generations} generations, {evaluations} evaluations, {penalized} penalized)")]
    TuningFailure {
        generations: usize,
        evaluations: usize,
        penalized: usize,
    },

    /// A configuration struct violated its invariants.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
