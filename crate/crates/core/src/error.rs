use std::fmt;

use serde::Serialize;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge on [{lower}, {upper}] (error estimate {error:e})")]
    Quadrature { lower: f64, upper: f64, error: f64 },

    #[error("distribution has an infinite mean")]
    InfiniteMean,

    #[error("arrival cap of {cap} exceeded before reaching horizon {horizon}")]
    ArrivalCap { cap: u64, horizon: f64 },

    #[error("model hypothesis violated: {0}")]
    Hypothesis(HypothesisViolation),

    #[error("{0}")]
    Unsupported(String),

    #[error("line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

/// A failed analytic precondition of one of the asymptotic results.
///
/// The `Display` form spells out the condition as a formula so that reports
/// and CLI diagnostics can be traced back to the failed assumption.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum HypothesisViolation {
    /// Expected claim outgo must stay below premium income: μ_G < c·μ_H.
    SafetyLoad { claim_mean: f64, premium_per_claim: f64 },
    /// Inter-arrival lower coefficients must grow at most polynomially.
    ArrivalCoefficientGrowth { growth: String },
    /// Claim upper coefficients must be bounded (ENUOD).
    ClaimCoefficientBounded { growth: String },
    /// Claim upper coefficients must satisfy g_U(n) = o(n^(r-1)) for some r
    /// with E[Y^r] finite.
    ClaimCoefficientGrowth { growth: String, moment_index: f64 },
    /// The random horizon must be negligible against the claim tail.
    HorizonTail { horizon: String, claims: String },
    /// The claim distribution must be consistently varying.
    ClaimClass { claims: String },
    /// The random horizon must have a finite mean.
    HorizonMean { horizon: String },
    /// The horizon function must satisfy ln x/(x g(x)) ↓ 0.
    HorizonFunction { function: String },
}

impl fmt::Display for HypothesisViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypothesisViolation::SafetyLoad {
                claim_mean,
                premium_per_claim,
            } => write!(
                f,
                "safety load μ_G < c·μ_H fails: μ_G = {claim_mean}, c·μ_H = {premium_per_claim}"
            ),
            HypothesisViolation::ArrivalCoefficientGrowth { growth } => write!(
                f,
                "inter-arrival condition g_L(n)=o(n^b) for some b>0 fails: dominating coefficients grow {growth}"
            ),
            HypothesisViolation::ClaimCoefficientBounded { growth } => write!(
                f,
                "claims must be ENOD (bounded dominating coefficient M_G); coefficients grow {growth}"
            ),
            HypothesisViolation::ClaimCoefficientGrowth {
                growth,
                moment_index,
            } => write!(
                f,
                "claim condition g_U(n)=o(n^(r-1)) with E[Y^r]<∞ fails: coefficients grow {growth}, moment index {moment_index}"
            ),
            HypothesisViolation::HorizonTail { horizon, claims } => write!(
                f,
                "horizon condition P(τ>x)=o(Ḡ(x)) fails for τ ~ {horizon} against claims {claims}"
            ),
            HypothesisViolation::ClaimClass { claims } => write!(
                f,
                "claim distribution {claims} is not consistently varying (class C)"
            ),
            HypothesisViolation::HorizonMean { horizon } => {
                write!(f, "random horizon {horizon} has infinite mean")
            }
            HypothesisViolation::HorizonFunction { function } => write!(
                f,
                "horizon condition ln x/(x g(x)) ↓ 0 fails for g(x) = {function}"
            ),
        }
    }
}
