use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("need at least {required} samples, got {actual}")]
    TooFewSamples { required: usize, actual: usize },

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("detrending bandwidth {bandwidth} is smaller than the minimum sample spacing {spacing}")]
    BandwidthBelowSpacing { bandwidth: f64, spacing: f64 },

    #[error("rank-deficient least-squares design: {0}")]
    RankDeficient(&'static str),

    #[error("too few supported grid points for fitting: {actual} < {required}")]
    InsufficientSupport { required: usize, actual: usize },

    #[error("non-positive density decay rate kappa_u = {0}")]
    NonPositiveKappaU(f64),

    #[error("grid too narrow: boundary density ratio {ratio:.3e} at x = {x}")]
    GridTooNarrow { x: f64, ratio: f64 },

    #[error("ensemble went extinct at step {step} (mu = {mu}, b = {b})")]
    EnsembleExtinct { mu: f64, b: f64, step: usize },

    #[error("decay rate out of domain: lag-1 autocorrelation {alpha} not in (0, 1)")]
    AcfOutOfDomain { alpha: f64 },

    #[error("indicator track has no usable windows")]
    EmptyTrack,

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
