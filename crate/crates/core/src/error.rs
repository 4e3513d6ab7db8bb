//! Error types shared across the crate.

use thiserror::Error;

/// A violated [`NetworkParams`](crate::model::NetworkParams) or
/// [`Policy`](crate::model::Policy) invariant. Each variant names its field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("alpha must exceed 2 (mean interference diverges), got {0}")]
    Alpha(f64),
    #[error("lambda1 must be positive, got {0}")]
    Lambda1(f64),
    #[error("lambda2 must be non-negative, got {0}")]
    Lambda2(f64),
    #[error("p1 must be positive, got {0}")]
    P1(f64),
    #[error("p2 must be positive, got {0}")]
    P2(f64),
    #[error("d must be non-negative, got {0}")]
    Distance(f64),
    #[error("tau must lie in (0,1), got {0}")]
    Tau(f64),
    #[error("gamma must be positive, got {0}")]
    Gamma(f64),
    #[error("theta must be non-negative, got {0}")]
    Theta(f64),
    #[error("beta must be positive, got {0}")]
    Beta(f64),
    #[error("{field} must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
}

impl ParamError {
    /// Name of the offending field.
    pub fn field(&self) -> &'static str {
        match self {
            ParamError::Alpha(_) => "alpha",
            ParamError::Lambda1(_) => "lambda1",
            ParamError::Lambda2(_) => "lambda2",
            ParamError::P1(_) => "p1",
            ParamError::P2(_) => "p2",
            ParamError::Distance(_) => "d",
            ParamError::Tau(_) => "tau",
            ParamError::Gamma(_) => "gamma",
            ParamError::Theta(_) => "theta",
            ParamError::Beta(_) => "beta",
            ParamError::NotFinite { field, .. } => field,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    /// The subdivision budget ran out. `value` is still the best estimate.
    #[error("quadrature tolerance not met: value {value:e}, estimated error {error:e}")]
    ToleranceNotMet { value: f64, error: f64 },
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("root finder did not converge after {iters} iterations (last x = {x})")]
    NonConvergence { iters: usize, x: f64 },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SapError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("measured interference must be positive, got {0}")]
    NonPositiveInterference(f64),
    #[error("primary protection infeasible: outage {outage:.4} at theta = {theta_max:e} still exceeds tau = {tau}")]
    InfeasibleProtection { outage: f64, tau: f64, theta_max: f64 },
    #[error("only {occupied} trials landed in the conditioning bin (need {required})")]
    InsufficientBinOccupancy { occupied: u64, required: u64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = SapError> = std::result::Result<T, E>;
