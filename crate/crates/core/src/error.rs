use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("matrix is not Hermitian: entry ({row}, {col}) deviates from the conjugate of ({col}, {row}) by {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("density operator has trace {trace}, expected 1")]
    TraceNotUnit { trace: f64 },

    #[error("degenerate measure: covariance trace {trace:e} is not above {floor:e}")]
    DegenerateMeasure { trace: f64, floor: f64 },

    #[error("invalid hidden-variable strategy: {0}")]
    InvalidStrategy(String),

    #[error("time step dt = {dt} exceeds the limit {limit} ({reason})")]
    StepSize { dt: f64, limit: f64, reason: String },

    #[error("non-finite state in trajectory {trajectory}, particle {particle} at step {step} (t = {time})")]
    NonFinite { trajectory: usize, particle: usize, step: usize, time: f64 },

    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("velocity estimates are not comparable: {0}")]
    BinMismatch(String),
}

impl Error {
    /// True for errors caused by the caller's parameters rather than by a
    /// numerical failure during a run.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NonFinite { .. } | Error::NotPositive { .. } | Error::TraceNotUnit { .. }
        )
    }
}
