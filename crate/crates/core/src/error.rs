use thiserror::Error;

/// Errors raised by the geometry, isoperimetry and spectral routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown warping function kind `{0}`")]
    UnknownKind(String),

    #[error("kind `{kind}` expects {expected} parameter(s), got {got}")]
    BadArity {
        kind: String,
        expected: usize,
        got: usize,
    },

    #[error("parameter `{name}` must be positive, got {value}")]
    NonpositiveParameter { name: &'static str, value: f64 },

    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("warping function evaluation failed at r = {r}")]
    EvaluationFailure { r: f64 },

    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),

    #[error("quantity is singular at the pole; need r > 0, got {0}")]
    PoleSingularity(f64),

    #[error("warping function is not valid at the pole (psi(0) = {psi_at_zero}, psi'(0) = {dpsi_at_zero})")]
    PoleInvalid { psi_at_zero: f64, dpsi_at_zero: f64 },

    #[error("adaptive quadrature did not converge within {budget} evaluations (error estimate {error:e})")]
    QuadratureNonConvergence { budget: usize, error: f64 },

    #[error("volume {volume} is too large for the small-volume expansion (eps = {eps})")]
    VolumeTooLarge { volume: f64, eps: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("eigenvalue bisection did not converge")]
    NonConvergedBisection,

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("tail integral diverges beyond R = {0}")]
    TailDivergence(f64),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("sphere function is not positive (min sampled value {0})")]
    NonPositiveU(f64),

    #[error("could not bracket a radius with volume {0}")]
    BracketFailure(f64),

    #[error("the two forms of {what} disagree: {a} vs {b}")]
    IdentityMismatch { what: &'static str, a: f64, b: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
