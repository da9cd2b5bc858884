use thiserror::Error;

/// Errors raised by the simulator and optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LwaError {
    /// The frequency lies below the parallel-plate cutoff `c / (2b)`.
    #[error("frequency {frequency_hz} Hz is below the waveguide cutoff {cutoff_hz} Hz")]
    CutoffViolation { frequency_hz: f64, cutoff_hz: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// Waterfilling was asked to allocate power with no usable subband.
    #[error("every channel gain is zero; nothing to allocate power to")]
    AllGainsZero,

    #[error("channel has zero maximum magnitude; cannot normalize")]
    ZeroChannel,

    #[error("array geometry violation: {0}")]
    GeometryViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl LwaError {
    /// True for failures of the numerical pipeline (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LwaError::CutoffViolation { .. } | LwaError::AllGainsZero | LwaError::ZeroChannel
        )
    }
}

impl From<std::io::Error> for LwaError {
    fn from(err: std::io::Error) -> Self {
        LwaError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LwaError>;
