//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the special-function kernel, the reduction pipeline,
/// the integrators and the closed-form evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested function.
    #[error("{what}: argument {value} is outside the domain")]
    OutOfDomain { what: &'static str, value: f64 },

    /// A caller-side precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The structure matrix does not have the shape produced by the first reduction.
    #[error("structure matrix shape violation: {0}")]
    Shape(String),

    /// The cubic system admits no coercive mass-like conserved quantity.
    #[error("system has no coercive mass-like conserved quantity")]
    NonCoercive,

    /// All of p1..p5 vanish.
    #[error("trivial system: all of p1..p5 are zero")]
    Trivial,

    /// The parameter set falls outside the cases that have closed forms.
    #[error("no closed form for this parameter set: {0}; use the numerical oracle instead")]
    Unsupported(String),

    /// A mixed p1/p3 case whose ratio has no closed form.
    #[error("p1/p3 = {0} has no closed form (only 1/3, 1 and 3 are supported); use the numerical oracle instead")]
    UnsupportedRatio(f64),

    /// A formula is evaluated at one of its singular points.
    #[error("singular evaluation: {0}")]
    Singular(String),

    /// The adaptive integrator could not keep the step above the underflow floor.
    #[error("step size underflow at tau = {tau}; the flow is stiff or the parameters are invalid")]
    StepUnderflow { tau: f64 },

    /// A numerical routine could not reach the requested accuracy.
    #[error("accuracy not reached: {0}")]
    Accuracy(String),

    /// An internal consistency check failed.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
