use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} entries, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("states are at different times ({left} vs {right})")]
    TimeMismatch { left: f64, right: f64 },

    #[error("Hermitian symmetry violated: imaginary residue {residue:e} exceeds {tolerance:e}")]
    HermitianViolation { residue: f64, tolerance: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown nonlinearity `{0}` (expected zero, sine or cubic(lambda))")]
    UnknownNonlinearity(String),

    #[error("nonlinearity `{0}` has no registered antiderivative")]
    MissingAntiderivative(String),

    #[error("non-finite state at step {step} (t = {t}); recent max |u|: {history:?}")]
    BlowUp { step: usize, t: f64, history: Vec<f64> },

    #[error("rk4 reference unstable: h_fine = {h} exceeds stability bound {bound:.3e}")]
    Unstable { h: f64, bound: f64 },

    #[error("t_end = {t_end} is not an integer number of steps of size {h}")]
    NonIntegerSteps { t_end: f64, h: f64 },

    #[error("order fit needs at least 3 usable points, got {0}")]
    TooFewPoints(usize),

    #[error("reference run failed: {0}")]
    Reference(Box<Error>),

    #[error("state file: {0}")]
    StateFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
