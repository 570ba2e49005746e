use serde::{Deserialize, Serialize};

use crate::dependence::{DependenceSpec, Side};
use crate::error::{Error, HypothesisViolation, Result};
use crate::renewal::{ArrivalModel, RandomHorizon};
use crate::tails::TailModel;

/// Claim sizes `Y_i` with their (upper-orthant) dependence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimModel {
    pub marginal: TailModel,
    pub dependence: DependenceSpec,
}

/// Compound renewal risk model with net losses `X_i = Y_i − c·Z_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskModel {
    pub claims: ClaimModel,
    pub arrivals: ArrivalModel,
    /// Premium income per unit time.
    pub premium_rate: f64,
}

impl RiskModel {
    pub fn new(claims: ClaimModel, arrivals: ArrivalModel, premium_rate: f64) -> Result<Self> {
        let model = Self {
            claims,
            arrivals,
            premium_rate,
        };
        model.validate()?;
        Ok(model)
    }

    /// Parameter ranges plus the safety load `μ_G < c·μ_H`.
    pub fn validate(&self) -> Result<()> {
        self.claims.marginal.validate()?;
        self.claims.dependence.validate()?;
        self.arrivals.validate()?;
        if !(self.premium_rate.is_finite() && self.premium_rate > 0.0) {
            return Err(Error::param("premium rate must be positive"));
        }
        if let Some(v) = self.safety_violation() {
            return Err(Error::Hypothesis(v));
        }
        Ok(())
    }

    pub fn claim_mean(&self) -> f64 {
        self.claims.marginal.mean().to_f64()
    }

    pub fn safety_violation(&self) -> Option<HypothesisViolation> {
        let claim_mean = self.claim_mean();
        let premium_per_claim = self.premium_rate * self.arrivals.mean_interarrival();
        (!(claim_mean < premium_per_claim)).then_some(HypothesisViolation::SafetyLoad {
            claim_mean,
            premium_per_claim,
        })
    }

    /// Conditions on claims and arrivals shared by every asymptotic result:
    /// `G ∈ C`, claim coefficients bounded or `o(n^(r−1))` with `E[Y^r] < ∞`,
    /// and polynomially growing arrival coefficients.
    pub fn structural_violations(&self) -> Vec<HypothesisViolation> {
        let mut out = Vec::new();
        let g = &self.claims.marginal;
        if !g.is_consistently_varying() {
            out.push(HypothesisViolation::ClaimClass { claims: g.to_string() });
        }
        let growth = self.claims.dependence.growth(Side::Upper);
        let moment_index = g.indices().moment_index.to_f64();
        if !matches!(growth, crate::dependence::GrowthClass::Bounded { .. })
            && !growth.is_little_o_of_power(moment_index - 1.0)
        {
            out.push(HypothesisViolation::ClaimCoefficientGrowth {
                growth: growth.to_string(),
                moment_index,
            });
        }
        out.extend(self.arrivals.growth_violation());
        out
    }

    /// Structural conditions plus `P(τ>x) = o(Ḡ(x))` and `E τ < ∞`.
    pub fn hypothesis_violations(&self, horizon: &RandomHorizon) -> Vec<HypothesisViolation> {
        let mut out = self.structural_violations();
        out.extend(horizon.tail_violation(&self.claims.marginal));
        if !horizon.mean().is_finite() {
            out.push(HypothesisViolation::HorizonMean {
                horizon: horizon.to_string(),
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn claims(dependence: DependenceSpec) -> ClaimModel {
        ClaimModel {
            marginal: TailModel::pareto(2.5, 1.0).unwrap(),
            dependence,
        }
    }

    #[test]
    fn safety_load_is_enforced() {
        let arrivals = ArrivalModel::poisson(1.0).unwrap();
        assert!(RiskModel::new(claims(DependenceSpec::Independent), arrivals, 2.0).is_ok());
        let err = RiskModel::new(claims(DependenceSpec::Independent), arrivals, 1.5).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(HypothesisViolation::SafetyLoad { .. })));
    }

    #[test]
    fn structural_checks() {
        let arrivals = ArrivalModel::poisson(1.0).unwrap();
        let ok = RiskModel::new(
            claims(DependenceSpec::FgmSparsePairs {
                theta: 0.5,
                max_pairs: None,
            }),
            arrivals,
            2.0,
        )
        .unwrap();
        assert!(ok.structural_violations().is_empty());
        let adjacent = RiskModel::new(claims(DependenceSpec::FgmAllAdjacentPairs { theta: 0.5 }), arrivals, 2.0).unwrap();
        assert!(matches!(
            adjacent.structural_violations()[..],
            [HypothesisViolation::ClaimCoefficientGrowth { .. }]
        ));
        let light = RiskModel::new(
            ClaimModel {
                marginal: TailModel::weibull(0.5, 0.5).unwrap(),
                dependence: DependenceSpec::Independent,
            },
            arrivals,
            2.0,
        )
        .unwrap();
        assert!(matches!(light.structural_violations()[..], [HypothesisViolation::ClaimClass { .. }]));
        let heavy_tau = RandomHorizon::Pareto { alpha: 1.5, xm: 1.0 };
        assert_eq!(ok.hypothesis_violations(&heavy_tau).len(), 1);
        let no_mean = RandomHorizon::Pareto { alpha: 0.8, xm: 1.0 };
        assert_eq!(ok.hypothesis_violations(&no_mean).len(), 2);
    }
}
