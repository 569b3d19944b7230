use crate::C64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point violates b1^2 + b2^2 + s*b1*b2 = 1 (residual {residual:.3e} > tol {tol:.1e})")]
    ConstraintViolation { residual: f64, tol: f64 },
    #[error("Gamma function pole at {z}")]
    GammaPole { z: C64 },
    #[error("seed point x = {x:.3e} lies outside the expansion radius {radius:.3e}")]
    SeedOutsideValidity { x: f64, radius: f64 },
    #[error("unsupported asymptotic case: {0}")]
    CaseUnsupported(String),
    #[error("wrong asymptotic case: {0}")]
    WrongCase(String),
    #[error("step size underflow at x = {x:.6e} (h = {h:.3e})")]
    StepFailure { x: f64, h: f64 },
    #[error("non-finite state at x = {x:.6e}")]
    NonFiniteState { x: f64 },
    #[error("state lies on the singular locus f = 0")]
    OnSingularLocus,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate frame: {0}")]
    FrameDegenerate(String),
    #[error("transport overflow at |z| = {r:.3e}")]
    TransportOverflow { r: f64 },
    #[error("asymptotic frame unstable under radius change ({change:.3e})")]
    AsymptoticMismatch { change: f64 },
    #[error("point is not in the real family")]
    NotRealFamily,
    #[error("value {value} incompatible with the requested family")]
    FamilyMismatch { value: C64 },
    #[error("trajectory span insufficient: {0}")]
    InsufficientSpan(String),
    #[error("event index {k} not found")]
    EventNotFound { k: i64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ConstraintViolation { .. }
                | Error::SeedOutsideValidity { .. }
                | Error::CaseUnsupported(_)
                | Error::WrongCase(_)
                | Error::OnSingularLocus
                | Error::InvalidArgument(_)
                | Error::NotRealFamily
                | Error::FamilyMismatch { .. }
                | Error::InsufficientSpan(_)
                | Error::EventNotFound { .. }
        )
    }
}
