use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outside the coefficient domain: {0}")]
    Domain(String),

    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("triple {0} is not a causal chain")]
    NotCausalChain(usize),

    #[error("points are not chronologically related")]
    NotChronological,

    #[error("pair is not timelike p-dualizable: {0}")]
    NotDualizable(String),

    #[error("atom at {0:?} lies outside the sampled window")]
    OutsideWindow(Vec<f64>),

    #[error("proper-time parametrization is not monotone at sample {0}")]
    NonMonotone(usize),

    #[error("singular Jacobian (caustic) at t = {0}")]
    Singular(f64),

    #[error("zero density at an endpoint carrying mass")]
    ZeroDensity,

    #[error("set is not tau-star-shaped: {0}")]
    NotStarShaped(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
