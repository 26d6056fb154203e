use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "linear solver ({method}) failed after {iterations} iterations: \
         residual {residual:.3e} > target {target:.3e} ({reason})"
    )]
    SolverFailure { method: &'static str, iterations: usize, residual: f64, target: f64, reason: &'static str },

    #[error("time step {step} (t = {time}) failed: {source}")]
    StepFailure {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("negative measurement {value:e} at node {node} (clamping disabled)")]
    NegativeMeasurement { node: usize, value: f64 },

    #[error(
        "fixed-point iteration did not converge in {iterations} iterations (last relative change {last_change:.3e})"
    )]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("objective minimum found at the gamma_c = {gamma_c} endpoint; gamma_c too small")]
    GammaCTooSmall { gamma_c: f64 },

    #[error("objective minimum found at the alpha_min = {alpha_min} endpoint; the search interval misses the interior minimum")]
    MinimumAtAlphaMin { alpha_min: f64 },

    #[error("unknown initial data spec: {0}")]
    UnknownInitialData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
