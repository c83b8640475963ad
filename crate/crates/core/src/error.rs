use thiserror::Error;

/// Errors raised by the numerical core and the scenario harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian (max |A_ij - conj(A_ji)| = {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("degenerate spectrum: gap {gap:e} between levels {level} and {} is below tolerance {tolerance:e}", level + 1)]
    DegenerateSpectrum {
        level: usize,
        gap: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step-halving check failed: final states differ by {difference:e} (tolerance {tolerance:e})")]
    NotConverged { difference: f64, tolerance: f64 },

    #[error("propagator step {step} broke unitarity (norm drift {drift:e})")]
    NonUnitaryStep { step: usize, drift: f64 },

    #[error("initial state is not an eigenstate (best overlap {overlap})")]
    InitialNotEigenstate { overlap: f64 },

    #[error("{what} vanishes; bound not applicable")]
    ZeroDenominator { what: &'static str },

    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("sweep check `{check}` failed: {message}")]
    CheckFailed { check: String, message: String },

    #[error("scenario tau = {tau}: {source}")]
    Scenario {
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for configuration problems (as opposed to numerical failures).
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigInvalid { .. } | Error::UnknownPreset(_) | Error::InvalidParameter(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
