//! Crate-wide error type. Variants mirror the failure modes of the
//! verification suites so the CLI can map them onto exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter tuple outside the operator's admissible range.
    #[error("invalid operator parameters: {0}")]
    InvalidParams(String),

    /// Grid or run configuration rejected before any computation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An inequality check was called with no sample points.
    #[error("empty sample")]
    EmptySample,

    /// A check was invoked outside the regime in which the estimate holds.
    #[error("regime violation: {0}")]
    RegimeViolation(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// Iterative eigensolver exceeded its iteration cap.
    #[error("eigensolver convergence failure: {0}")]
    ConvergenceFailure(String),

    /// Truncation-radius search left the admissible range.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// No finite constant pair covers the sampled inequality.
    #[error("bound fit failure: {0}")]
    FitFailure(String),

    /// Time stepper could not satisfy the local error target.
    #[error("time step failure: {0}")]
    StepFailure(String),

    /// Resolvent probed within roundoff of an eigenvalue.
    #[error("resolvent probe hit the spectrum near lambda = {re} + {im}i")]
    SpectrumHit { re: f64, im: f64 },

    /// No time in the requested range is resolved by the current grid.
    #[error("unresolved scale: {0}")]
    UnresolvedScale(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
