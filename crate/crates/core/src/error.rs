use thiserror::Error;

/// Failures reported by the solvers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("m = {m} lies within {tol:e} of the regime threshold {threshold}")]
    ThresholdDegenerate { m: f64, threshold: f64, tol: f64 },

    #[error("integral diverges at eta = 1: exponent {q} with d = {d} needs 2q + d > 0")]
    NotIntegrable { q: f64, d: u32 },

    #[error("quadrature error estimate {estimate:e} did not reach {requested:e} within {panels} panels")]
    ToleranceNotMet {
        estimate: f64,
        requested: f64,
        panels: usize,
    },

    #[error("kappa = {kappa} is outside the existence window ({low}, {high}) of this branch")]
    OutOfWindow { kappa: f64, low: f64, high: f64 },

    #[error("operation requires {expected}, model is {actual}")]
    WrongRegime {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("no sign change on [{low}, {high}]: f(low) = {f_low:e}, f(high) = {f_high:e}")]
    BracketFailure {
        low: f64,
        high: f64,
        f_low: f64,
        f_high: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
