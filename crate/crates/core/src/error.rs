use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite field")]
    NonFinite,

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("symbol `{name}` is not finite at frequency {freq:?}")]
    SymbolNonFinite { name: String, freq: Vec<f64> },

    #[error("backward heat not allowed (tau = {0})")]
    BackwardHeat(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("signal range exceeded at t = {0}")]
    SignalRangeExceeded(f64),

    #[error("solver failure on lateral mode {mode:?}: {reason}")]
    SolverFailure { mode: Vec<i64>, reason: String },

    #[error("inside obstacle: |x| = {radius} <= R = {obstacle}")]
    InsideObstacle { radius: f64, obstacle: f64 },

    #[error("fit degenerate: {0}")]
    FitDegenerate(String),

    #[error("tail unresolved: periodization bias {bias:.3e} exceeds 5% at r = {r_max}")]
    TailUnresolved { bias: f64, r_max: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
