use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("gcd({h}, {k}) != 1")]
    NotCoprime { h: i64, k: u64 },

    #[error("invalid truncation schedule: {0}")]
    InvalidSchedule(String),

    #[error("precision underflow at n = {n}: lower bound is not positive")]
    PrecisionUnderflow { n: u64 },

    #[error("sandwich violation at n = {n}: {detail}")]
    SandwichViolation { n: u64, detail: String },

    #[error("polynomial has no real root")]
    NoRealRoot,

    #[error("outside the validity regime: {0}")]
    Regime(String),

    #[error("certified radius {radius} exceeds the requested target {target}")]
    RadiusExceeded { radius: String, target: String },

    #[error("checkpoint {path}: {detail}")]
    Checkpoint { path: PathBuf, detail: String },

    #[error("certificate: {0}")]
    Certificate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn checkpoint(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Checkpoint {
            path: path.into(),
            detail: detail.into(),
        }
    }
}
