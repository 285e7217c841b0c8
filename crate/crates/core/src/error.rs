use thiserror::Error;

/// Errors raised by the numerical and geometric routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not reach tolerance within {max_subdivisions} subdivisions (estimated error {estimated_error:e})")]
    SubdivisionLimit {
        max_subdivisions: usize,
        estimated_error: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate needle: density integrates to zero on its support")]
    DegenerateNeedle,

    #[error("needle density is not normalized")]
    NotNormalized,

    #[error("non-integrable: {0}")]
    NonIntegrable(String),

    #[error("angular density cos(t + {phase})^{exponent} is negative inside [{lo}, {hi}]")]
    PhaseDomain {
        phase: f64,
        exponent: u32,
        lo: f64,
        hi: f64,
    },

    #[error("body is unbounded in direction {0}")]
    Unbounded(f64),

    #[error("origin is not an interior point of the body")]
    OriginNotInterior,

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("invalid polygon vertex {index}: {reason}")]
    InvalidVertex { index: usize, reason: String },

    #[error("invalid cone [{lo}, {hi}]: width must lie in [0, pi]")]
    InvalidCone { lo: f64, hi: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("no phase in [0, pi] keeps the angular density nonnegative on the cone")]
    EmptyAdmissibleSet,

    #[error("degenerate interval: angular normalization {0:e} is below 1e-14")]
    DegenerateInterval(f64),

    #[error("body violates the ball sandwich: {0}")]
    SandwichViolation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
