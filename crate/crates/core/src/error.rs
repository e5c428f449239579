use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },

    #[error("grid size mismatch between product factors")]
    GridMismatch,

    #[error("products of {0} factors are not supported (expected 2 or 3)")]
    FactorCount(usize),

    #[error("inexact quadrature: {points} points, at least {required} needed")]
    InexactQuadrature { points: usize, required: usize },

    #[error("state flags do not match model: {0}")]
    FlagMismatch(&'static str),

    #[error("model {0} has no diagonal linear symbol")]
    NotPde(&'static str),

    #[error("blow-up at t = {t}")]
    BlowUp { t: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trajectory has no snapshots")]
    MissingSnapshots,

    #[error("enumeration bound D = {0} exceeds 12")]
    EnumerationTooLarge(usize),

    #[error("linearization dimension {0} exceeds the guard")]
    DimensionOverflow(usize),

    #[error("newton iteration failed after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("initial guess amplitude {0:e} is below the floor for a nontrivial wave")]
    TrivialGuess(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
