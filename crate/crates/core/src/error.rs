use thiserror::Error;

/// Errors raised by the measure, transport, calculus, forms, annulus and
/// Hamiltonian operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weight {index} is not strictly positive ({value})")]
    NonpositiveWeight { index: usize, value: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("weights sum to {sum}, which is not within 1e-9 of 1")]
    WeightSumOutOfRange { sum: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("atoms {first} and {second} coincide; merge atoms first")]
    CoincidentAtoms { first: usize, second: usize },

    #[error("time {t} is not an interior grid point of the curve")]
    OutOfRange { t: f64 },

    #[error("reparametrization is not monotone: {reason}")]
    NonMonotone { reason: String },

    #[error("no Jacobian available for vector field")]
    JacobianUnavailable,

    #[error("curve has no velocities")]
    MissingVelocities,

    #[error("inner radius {r} must lie in (0, 1)")]
    BadRadius { r: f64 },

    #[error("curve is not closed: W2(start, end) = {gap}")]
    NotClosedCurve { gap: f64 },

    #[error("form is not closed: sampled |dΛ| = {defect} exceeds tolerance {tol}")]
    NotClosedForm { defect: f64, tol: f64 },

    #[error("odd ambient dimension {dim}; a symplectic structure needs D = 2d")]
    OddDimension { dim: usize },

    #[error("atoms collided at t = {t} (separation {separation})")]
    AtomCollision { t: f64, separation: f64 },

    #[error("implicit step at t = {t} did not converge")]
    StepRejected { t: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonpositiveWeight { .. } => "NonpositiveWeight",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::WeightSumOutOfRange { .. } => "WeightSumOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::CoincidentAtoms { .. } => "CoincidentAtoms",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NonMonotone { .. } => "NonMonotone",
            Error::JacobianUnavailable => "JacobianUnavailable",
            Error::MissingVelocities => "MissingVelocities",
            Error::BadRadius { .. } => "BadRadius",
            Error::NotClosedCurve { .. } => "NotClosedCurve",
            Error::NotClosedForm { .. } => "NotClosedForm",
            Error::OddDimension { .. } => "OddDimension",
            Error::AtomCollision { .. } => "AtomCollision",
            Error::StepRejected { .. } => "StepRejected",
            Error::Invalid(_) => "Invalid",
        }
    }

    /// Failures of the numerics on otherwise valid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::AtomCollision { .. }
                | Error::StepRejected { .. }
                | Error::NotClosedForm { .. }
                | Error::NotClosedCurve { .. }
                | Error::CoincidentAtoms { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
