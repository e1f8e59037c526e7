use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series must contain at least one value")]
    EmptyPath,

    #[error("length mismatch: x has {x} values, u has {u}")]
    LengthMismatch { x: usize, u: usize },

    #[error("first indicator is 0 and no pre-window covers the last fresh record")]
    UndefinedOrigin,

    #[error("indicator series has a run of {run} zeros, bound is {max}")]
    ZeroRunViolation { run: usize, max: usize },

    #[error("pattern enumeration needs {bits} bits, cap is {cap}")]
    EnumerationTooLarge { bits: usize, cap: usize },

    #[error("sample too short: need at least {needed} values, got {got}")]
    SampleTooShort { needed: usize, got: usize },

    #[error("too few exceedances: {got} (need at least {needed})")]
    TooFewExceedances { got: usize, needed: usize },

    #[error("conditioning event too rare: {got} occurrences (need at least {needed})")]
    ConditioningTooRare { got: usize, needed: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("missing tail dependence coefficient for lag {0}")]
    MissingCoefficient(usize),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("worker pool: {0}")]
    Pool(String),
}
