use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("speed {0} is outside (0, 8)")]
    InvalidSpeed(f64),
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("points {0} and {1} are not partners")]
    NotAnArc(usize, usize),
    #[error("points {0} and {1} are already partners")]
    AlreadyAnArc(usize, usize),
    #[error("index {index} out of range for {points} points")]
    IndexOutOfRange { index: usize, points: usize },
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
    #[error("size {requested} exceeds the configured cap {cap}")]
    SizeCap { requested: usize, cap: usize },
    #[error("({0}, {1}) is not a coprime pair with q > 1")]
    NotCoprime(u32, u32),
    #[error("prefactor has a pole at kappa = {0}")]
    NonFinite(f64),
    #[error("marked points must be finite and strictly increasing")]
    Unordered,
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("branch tracking step too coarse on {0}")]
    BranchStep(&'static str),
    #[error("imaginary residual {residual:e} exceeds tolerance for value {value:e}")]
    ImagResidual { value: f64, residual: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("kappa = {kappa} is an exceptional speed for N = {n_pairs}")]
    Exceptional { kappa: f64, n_pairs: usize },
    #[error("extrapolation failed: {0}")]
    Extrapolation(String),
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("linear system is singular")]
    Singular,
    #[error("fugacity {0} is not a zero of the meander determinant")]
    NotAZero(f64),
    #[error("neutrality violated for variable {variable}: total power {total}")]
    Neutrality { variable: usize, total: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
