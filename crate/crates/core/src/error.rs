use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("lift unwrapping failed at step {step}: {detail}")]
    Unwrap { step: usize, detail: String },

    #[error("malformed curve: {0}")]
    MalformedCurve(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("orbit tracking failed: {0}")]
    Tracking(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("box is not wandering: T^{n}(W) meets W")]
    NotWandering { n: i64 },

    #[error("times {times:?} are not comparable over the given interval")]
    Incomparable { times: Vec<i64> },

    #[error("cyclic order changes across fibres of the comparison interval (fibre {fibre})")]
    OrderFlip { fibre: f64 },

    #[error("image boxes overlap on the comparison fibre: {0}")]
    Overlap(String),

    #[error("empty bins at resolution {bins}; try at most {suggested} bins")]
    Resolution { bins: usize, suggested: usize },

    #[error("config error (line {line}): {detail}")]
    Config { line: usize, detail: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
