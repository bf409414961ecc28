use thiserror::Error;

/// Errors produced by grid construction, functional evaluation, and the solvers.
#[derive(Debug, Error)]
pub enum DnlsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {len} does not match grid resolution {expected}")]
    FieldLengthMismatch { len: usize, expected: usize },

    #[error("undefined functional: zero field")]
    ZeroField,

    #[error("ground state requires a periodic grid (Q does not vanish at x = 0)")]
    GroundStateDomain,

    #[error("nonnegative energy: blow-up certificate requires E < 0, got {0}")]
    NonnegativeEnergy(f64),

    #[error("zero-gradient input: rescaling is undefined")]
    ZeroGradient,

    #[error("solver step failure: {0}")]
    StepFailure(String),

    #[error("convergence study needs at least 2 refinements, got {0}")]
    TooFewRefinements(usize),

    #[error("observed order {observed:.2} below expected {expected:.2}")]
    OrderBelowExpected { observed: f64, expected: f64 },

    #[error("fixture construction failed: {0}")]
    Construction(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DnlsError>;
