use std::fmt;

use thiserror::Error;

/// Errors produced by the analytic and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition on the arguments does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The requested working precision cannot support the computation.
    #[error("insufficient precision: {0}")]
    Precision(String),
    /// Adaptive quadrature ran out of budget before meeting its tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(QuadratureFailure),
    /// A request would exceed the time or memory budget of the sampler.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// Reading or writing an output file failed.
    #[error("i/o error: {0}")]
    Io(String),
}

/// Diagnostics attached to a failed adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureFailure {
    pub context: String,
    pub intervals: usize,
    pub estimate: f64,
    pub error_estimate: f64,
    pub tolerance: f64,
}

impl fmt::Display for QuadratureFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: estimate {:e} with error {:e} after {} intervals (relative tolerance {:e})",
            self.context, self.estimate, self.error_estimate, self.intervals, self.tolerance
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
