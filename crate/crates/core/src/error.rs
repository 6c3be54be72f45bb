use thiserror::Error;

/// Rejected input: a problem definition or run option outside its documented
/// domain. The `path` names the offending field (`alpha`, `potential.matrix`,
/// `s_step`, ...) so callers can surface actionable messages.
#[derive(Debug, Clone, Error)]
#[error("invalid `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

/// Failure inside a numerical routine after inputs were accepted.
#[derive(Debug, Clone, Error)]
pub enum NumericError {
    #[error("integration blow-up at step {step}: non-finite frame entries")]
    IntegrationBlowup { step: usize },
    #[error("non-finite characteristic value at lambda = {lambda}")]
    NonFiniteValue { lambda: String },
    #[error("winding number {winding} did not stabilize to an integer (tolerance {tol})")]
    MultiplicityUndetermined { winding: f64, tol: f64 },
    #[error("eigenvalue search exhausted scan range at s_max = {s_max} with {found} of {requested} requested")]
    ScanExhausted { s_max: f64, found: usize, requested: usize },
    #[error("finite-difference eigensolver failed: {0}")]
    EigenSolver(String),
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("normalization point lambda = {lambda} coincides with an eigenvalue")]
    NormalizationAtEigenvalue { lambda: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
