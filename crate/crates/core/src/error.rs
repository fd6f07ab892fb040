use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("window {window:.4e} m is smaller than 8x the beam waist ({required:.4e} m)")]
    WindowTooSmall { window: f64, required: f64 },

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("non-finite field after propagation step {step}")]
    BlowUp { step: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("{nx}x{ny} grid is not divisible by factor {factor}")]
    NotDivisible { nx: usize, ny: usize, factor: usize },

    #[error("{axis} label {value:e} lies outside [{min:e}, {max:e}]")]
    LabelOutOfRange {
        axis: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid split fractions: {0}")]
    InvalidFractions(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed dataset: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Index of the sample that failed, if the error was raised while generating one.
    pub fn sample_index(&self) -> Option<usize> {
        match self {
            Error::Sample { index, .. } => Some(*index),
            _ => None,
        }
    }

    /// True for errors originating from a diverging propagation.
    pub fn is_blow_up(&self) -> bool {
        match self {
            Error::BlowUp { .. } | Error::NonFinite => true,
            Error::Sample { source, .. } => source.is_blow_up(),
            _ => false,
        }
    }
}
