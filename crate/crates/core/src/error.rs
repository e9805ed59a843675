//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by profile construction, the fiber solvers and the
/// diagnostics built on top of them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("profile is empty")]
    EmptyProfile,
    #[error("non-positive coefficient value {value} at index {index}")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("breakpoints/samples must be strictly increasing (violation at index {index})")]
    UnsortedBreakpoints { index: usize },
    #[error("malformed profile: {0}")]
    MalformedProfile(String),
    #[error("y = {y} lies outside [0, {height}]")]
    OutOfDomain { y: f64, height: f64 },
    #[error("well threshold {c1} outside (c_m, c_M] = ({c_min}, {c_max}]")]
    ThresholdOutOfRange { c1: f64, c_min: f64, c_max: f64 },
    #[error("adaptive integrator step size underflow at y = {y}")]
    StepSizeUnderflow { y: f64 },
    #[error("eigenvalue bracket failed for index {ell} on [{lo}, {hi}]")]
    BracketFailure { ell: usize, lo: f64, hi: f64 },
    #[error("lambda = {lambda} is not an eigenvalue (phase mismatch {mismatch})")]
    NotAnEigenvalue { lambda: f64, mismatch: f64 },
    #[error("profile is not a smooth analytic preset")]
    NotSmoothProfile,
    #[error("(mu, lambda) = ({mu}, {lambda}) lies outside the required sector")]
    OutOfSector { mu: f64, lambda: f64 },
    #[error("unsupported cross-section: {0}")]
    UnsupportedCrossSection(String),
    #[error("bad layer ({a}, {b})")]
    BadLayer { a: f64, b: f64 },
    #[error("empty family")]
    EmptyFamily,
    #[error("profile is not piecewise constant")]
    NotPiecewiseConstant,
    #[error("eigenpair (mu = {mu}, lambda = {lambda}) is not in the non-guided sector")]
    NotInSector { mu: f64, lambda: f64 },
    #[error("layer closure intersects the well closure")]
    LayerIntersectsWell,
    #[error("no well supplied for a guided-family check")]
    MissingWell,
    #[error("requested {requested} eigenvalues from a matrix of order {order}")]
    TooManyRequested { requested: usize, order: usize },
    #[error("eigenvalue {lambda} is not isolated")]
    ClusterUnresolved { lambda: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cannot parse profile file: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the numerical methods themselves, as opposed to
    /// invalid input or a request outside a method's domain.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. }
                | Error::BracketFailure { .. }
                | Error::NotAnEigenvalue { .. }
                | Error::ClusterUnresolved { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
