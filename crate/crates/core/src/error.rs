use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no sliding solution: {0}")]
    NoSliding(String),

    #[error("value not representable exactly: {0}")]
    NotRepresentable(String),

    #[error("not a Hopf point: {0}")]
    NotHopfPoint(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },

    #[error("non-finite right-hand side at t = {t}")]
    NonFinite { t: f64, state: Vec<f64> },

    #[error("construction failed: {0}")]
    Construction(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerical integration itself.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::StepUnderflow { .. } | Error::NonFinite { .. })
    }
}
