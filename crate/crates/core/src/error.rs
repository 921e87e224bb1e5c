use thiserror::Error;

/// Errors produced by the model, budget, and Monte Carlo layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A parameter violates its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Atom or bin index outside the container.
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    /// An operation was asked to run backwards in time.
    #[error("temporal order violated: {0}")]
    TemporalOrder(String),

    /// The field schedule does not have the single-flip form this
    /// operation supports.
    #[error("unsupported field schedule: {0}")]
    UnsupportedSchedule(String),

    /// A conditional estimator would see too few heralded events to
    /// report a meaningful rate.
    #[error("insufficient heralded events: expected {expected:.1}, need at least {required}")]
    InsufficientHeralds { expected: f64, required: u64 },

    /// The requested simulation would never (or effectively never)
    /// terminate; reported analytically instead of looping.
    #[error("non-terminating simulation: {0}")]
    NonTerminating(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
