use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("requested order {requested} exceeds the supported cap {cap}")]
    OrderCap { requested: usize, cap: usize },

    #[error("order {requested} needs cumulants up to order {requested}, only {available} available")]
    OrderInsufficient { requested: usize, available: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: need at least {needed} polynomials, got {got}")]
    LengthMismatch { needed: usize, got: usize },

    #[error("gamma = {gamma} lies outside the exponent domain ({lo}, {hi})")]
    ExponentDomain { gamma: f64, lo: f64, hi: f64 },

    #[error("X_T has no exponential moments: psi(lambda) >= r for every tested lambda > 0")]
    MomentDomain,

    #[error("model is not {expected}")]
    WrongSpectralSide { expected: &'static str },

    #[error("no positive root of psi(lambda) = {r}")]
    NoRoot { r: f64 },

    #[error(
        "exact Wiener-Hopf factorization is only available for one-sided models; \
         use the Monte Carlo factor estimator (mc::empirical_factor_cumulants) for two-sided jumps"
    )]
    UnsupportedFactorization,

    #[error("unsupported evaluation path: {0}")]
    UnsupportedEvaluation(&'static str),

    #[error("x = {x} is outside the support [{x_star}, inf)")]
    OutOfSupport { x: f64, x_star: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
