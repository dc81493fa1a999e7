use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model coordinates: {0}")]
    InvalidCoordinates(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("curve is not strictly convex: curvature {curvature:e} at parameter {parameter:.6}")]
    NotConvex { parameter: f64, curvature: f64 },

    #[error("curve leaves the open hemisphere: radius {radius:.6} at parameter {parameter:.6}")]
    OutsideHemisphere { parameter: f64, radius: f64 },

    #[error("Gauss-Bonnet residual {residual:e} exceeds tolerance {tolerance:e}")]
    GaussBonnet { residual: f64, tolerance: f64 },

    #[error("conformal factor not positive enough: min f = {min:e} at {location:?}")]
    NonPositiveFactor { min: f64, location: Vec<f64> },

    #[error("inconsistent curve invariants: {0}")]
    InconsistentInvariants(String),

    #[error("root finder did not converge: {0}")]
    RootFinder(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    /// Errors that indicate a bug or a numerical breakdown rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::InconsistentInvariants(_)
                | Error::RootFinder(_)
                | Error::Integration(_)
                | Error::Internal(_)
        )
    }
}
