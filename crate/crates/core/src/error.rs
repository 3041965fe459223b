use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("region {region} is not contained in the space")]
    RegionOutside { region: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature spec: {0}")]
    InvalidQuadrature(String),

    #[error("point {point} is already in the configuration")]
    DuplicatePoint { point: String },

    #[error("point {point} is not in the configuration")]
    MissingPoint { point: String },

    #[error("{what} is not finite ({value}) at {context}")]
    NonFinite {
        what: String,
        value: f64,
        context: String,
    },

    #[error("invalid exponent p = {0}; need p >= 1 or p = inf")]
    InvalidExponent(f64),

    #[error("invalid Monte Carlo spec: {0}")]
    InvalidMc(String),

    #[error("invalid intensity {0}; need a finite value >= 0")]
    InvalidIntensity(f64),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("event `{label}` is not monotone (tag {tag})")]
    NotMonotone { label: String, tag: String },

    #[error("event `{label}` has no closed-form probability")]
    NoClosedForm { label: String },

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("functional `{label}` took a non-integer value {value}")]
    NonInteger { label: String, value: f64 },

    #[error("functional `{label}` is out of range: {detail}")]
    OutOfRange { label: String, detail: String },

    #[error("degenerate estimate: {0}")]
    Degenerate(String),

    #[error("empty event family after the probability guard")]
    EmptyFamily,

    #[error("invalid Young function: {0}")]
    InvalidYoung(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("check `{id}` failed: {message}")]
    Check { id: String, message: String },
}
