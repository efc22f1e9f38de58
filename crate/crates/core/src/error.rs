use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("family {0} has no regularly varying tail")]
    UnsupportedFamily(&'static str),

    #[error("moment of order {order} is infinite (tail index a = {index})")]
    InfiniteMoment { order: u32, index: f64 },

    #[error("unstable model: rho = {rho} >= 1 (the queue is stable iff rho < 1)")]
    UnstableModel { rho: f64 },

    #[error("second-order expansion needs a > 2, got a = {0}")]
    SecondOrderUnavailable(f64),

    #[error("first-order expansion needs a > 1, got a = {0}")]
    FirstOrderUnavailable(f64),

    #[error("operation requires a finite retrial rate")]
    InfiniteRetrialRate,

    #[error("series coefficient {index} reached {value:e}; the recurrence is unstable")]
    DivergenceGuard { index: usize, value: f64 },

    #[error("index {index} is beyond the series truncation order {order}")]
    IndexBeyondTruncation { index: usize, order: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("idle fraction {fraction:.4} is below 1%; conditional orbit law not estimable")]
    InsufficientIdleTime { fraction: f64 },

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DivergenceGuard { .. } => 3,
            _ => 2,
        }
    }
}
