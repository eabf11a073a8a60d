use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error("degenerate direction: gradient norm {norm:e} below threshold")]
    DegenerateDirection { norm: f64 },

    #[error("iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        /// Residual history of the failed run.
        residuals: Vec<f64>,
    },

    #[error("ill-conditioned pseudoinverse row: |denominator| = {denominator:e}")]
    IllConditionedRow { denominator: f64 },

    #[error("numeric rank {rank} of the pseudo-metric is below the {required} requested components")]
    RankDeficient { rank: usize, required: usize },

    #[error("recovered {found} of {requested} columns: {reason}")]
    PartialRecovery {
        found: usize,
        requested: usize,
        reason: String,
    },

    #[error("model construction failed: {0}")]
    ModelConstruction(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
