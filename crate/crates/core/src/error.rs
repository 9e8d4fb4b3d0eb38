use thiserror::Error;

pub type Result<T> = std::result::Result<T, QfcError>;

/// Failure modes shared by every model, fit and simulation routine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QfcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("numeric failure after {iterations} iterations: {message}")]
    NumericFailure { message: String, iterations: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("no periodicity: {0}")]
    NoPeriodicity(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
}

impl QfcError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QfcError::InvalidArgument(msg.into())
    }
}

/// Rejects NaN and infinities with a message naming the offending input.
pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(QfcError::invalid(format!("{name} must be finite, got {value}")))
    }
}

pub(crate) fn ensure_non_negative(name: &str, value: f64) -> Result<f64> {
    ensure_finite(name, value)?;
    if value < 0.0 {
        return Err(QfcError::invalid(format!("{name} must be >= 0, got {value}")));
    }
    Ok(value)
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<f64> {
    ensure_finite(name, value)?;
    if value <= 0.0 {
        return Err(QfcError::invalid(format!("{name} must be > 0, got {value}")));
    }
    Ok(value)
}

pub(crate) fn ensure_unit_interval(name: &str, value: f64) -> Result<f64> {
    ensure_finite(name, value)?;
    if !(0.0..=1.0).contains(&value) {
        return Err(QfcError::invalid(format!("{name} must lie in [0, 1], got {value}")));
    }
    Ok(value)
}
