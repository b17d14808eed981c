use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("price {0} must lie strictly inside (0, 1)")]
    BoundaryPrice(f64),
    #[error("bet fraction {0} is outside the admissible range")]
    InvalidFraction(f64),
    #[error("payout exponent alpha must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
    #[error("capital must be finite and positive, got {0}")]
    InvalidCapital(f64),
    #[error("population has no investors")]
    EmptyPopulation,
    #[error("aggregate exposure does not change sign on the interior price bracket (exposure {at_low} at low end, {at_high} at high end)")]
    NoInteriorClearing { at_low: f64, at_high: f64 },
    #[error("bisection converged but residual exposure {residual} exceeds the tolerance")]
    Unconverged { residual: f64 },
    #[error("two-investor closed form needs {0}")]
    ClosedFormDomain(&'static str),
    #[error("walk needs at least one step")]
    ZeroSteps,
    #[error("step count {k} is outside [0, {n}]")]
    StepOutOfRange { k: i64, n: u64 },
    #[error("k = {k} lies outside the bound's validity region k <= N*p = {limit}")]
    OutOfValidityRegion { k: i64, limit: f64 },
    #[error("{0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
