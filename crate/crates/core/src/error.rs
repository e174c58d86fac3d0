use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid order parameter: {0}")]
    OrderParameter(String),

    #[error("slope indices j={j}, k={k} out of range for n={n} levels")]
    IndexOutOfRange { j: usize, k: usize, n: usize },

    #[error("magnetization t={t} is closer than {eps} to ±1")]
    DegenerateMagnetization { t: f64, eps: f64 },

    #[error("system size N={n} exceeds the enumeration cap {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("invalid simulation spec: {0}")]
    Spec(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("cascade with {tuples} tuples exceeds the cap {cap}")]
    CascadeCap { tuples: u128, cap: usize },

    #[error("gamma_bar must be positive and strictly decreasing: {0:?}")]
    NonDecreasingGamma(Vec<f64>),

    #[error("level {level} is not frozen: beta * gamma_bar = {product} <= 1")]
    NotFrozen { level: usize, product: f64 },

    #[error("unknown reference distribution '{0}'")]
    UnknownReference(String),

    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { got: usize, need: usize },

    #[error("sample resolved only above {resolved}, interval starts at {start}")]
    ShallowTruncation { resolved: f64, start: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
