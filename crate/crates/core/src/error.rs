use thiserror::Error;

/// Errors raised by the solver and diagnostic routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field is not divergence-free (max normalised residual {0:e})")]
    NotDivergenceFree(f64),

    #[error("wrong kernel kind: expected {expected}, got {got}")]
    WrongKernel { expected: &'static str, got: &'static str },

    #[error("CFL violation: dt = {dt:e} exceeds the limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("blow-up at t = {t}: H^s norm {norm:e} exceeds threshold {threshold:e}")]
    BlowUp { t: f64, norm: f64, threshold: f64 },

    #[error("non-finite values in state at t = {t}")]
    NonFinite { t: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("fit: {0}")]
    Fit(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
