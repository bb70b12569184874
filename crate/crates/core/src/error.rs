use alloc::string::String;
use core::fmt;

/// Errors produced by mesh construction, stencil derivation, kernel moment
/// integration and the solvers built on top of them.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    InvalidArgument(String),
    /// Integer scheme order outside the supported range.
    UnsupportedOrder(u32),
    /// Pointwise evaluation of a kernel at its singular point.
    SingularEvaluation { t: f64 },
    /// The kernel is not integrable on the requested interval.
    InvalidKernel(String),
    /// Adaptive quadrature did not meet its tolerance.
    AccuracyFailure { estimate: f64, subdivisions: usize },
    /// The implicit step at node `n` has a (numerically) zero pivot.
    NonInvertibleStep { n: usize },
    /// Not enough backward samples to apply a stencil.
    InsufficientHistory { required: usize, available: usize },
    /// The requested operation has no closed form for these inputs.
    Unsupported(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::UnsupportedOrder(order) => {
                write!(f, "unsupported scheme order {order} (supported: 1..=5 or fractional)")
            }
            Error::SingularEvaluation { t } => {
                write!(f, "kernel is singular at t = {t}; use moments instead")
            }
            Error::InvalidKernel(msg) => write!(f, "invalid kernel: {msg}"),
            Error::AccuracyFailure { estimate, subdivisions } => write!(
                f,
                "adaptive quadrature failed after {subdivisions} subdivisions (error estimate {estimate:e})"
            ),
            Error::NonInvertibleStep { n } => {
                write!(f, "step matrix at node {n} is not invertible")
            }
            Error::InsufficientHistory { required, available } => write!(
                f,
                "stencil needs {required} backward samples but only {available} are available"
            ),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
