use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty body")]
    EmptyBody,

    #[error("degenerate directional distribution")]
    DegenerateDirections,

    #[error("invalid directional distribution: {0}")]
    InvalidDirections(String),

    #[error("non-splitting hyperplane")]
    NonSplitting,

    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),

    #[error("unsupported dimension {dim} for {what}")]
    UnsupportedDimension { dim: usize, what: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("birth times must be strictly increasing in (0, t)")]
    NonIncreasingBirthTimes,

    #[error("margin must lie in [0, 1/2), got {0}")]
    InvalidMargin(f64),

    #[error("no interior segments; enlarge t or window")]
    EmptySample,

    #[error("zero denominator in ratio estimate")]
    ZeroDenominator,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
