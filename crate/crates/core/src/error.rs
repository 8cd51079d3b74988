use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("LLR attack coefficients are singular on channel {channel}")]
    SingularAttack { channel: usize },

    #[error("exponent attack with rho_ae = 0 needs x >= 0 (got x = {x})")]
    ZeroCorrelationExponent { x: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("OCNN: {0}")]
    Ocnn(String),

    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("scenario `{name}`: {source}")]
    Scenario {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}, key `{key}`: {reason}")]
    Config { line: usize, key: String, reason: String },

    #[error("cannot write `{path}`: {reason}")]
    Output { path: String, reason: String },
}

impl Error {
    /// Whether the error is a calibration failure, possibly wrapped in
    /// scenario context.
    pub fn is_calibration(&self) -> bool {
        match self {
            Error::Calibration(_) => true,
            Error::Scenario { source, .. } => source.is_calibration(),
            _ => false,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
