use serde::Serialize;

use crate::error::{Error, HypothesisViolation, Result};
use crate::estimate::{Estimator, McEstimate, RuinEstimate};
use crate::renewal::{n_tau_moment, renewal_function_mc, RandomHorizon};
use crate::stream::derive_seed;

use super::horizon::HorizonFunction;
use super::model::RiskModel;
use super::path::ruin_surface;

/// `E N(τ)·Ḡ(x)` with the failed conditions under which it is not an
/// asymptotic equivalent of `ψ(x; τ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximation {
    pub value: f64,
    /// Standard error inherited from a simulated `E N(τ)`.
    pub stderr: f64,
    pub expected_claims: McEstimate,
    pub violations: Vec<HypothesisViolation>,
}

/// `E N(τ)`; analytic for Poisson arrivals.
pub fn expected_claims(model: &RiskModel, tau: &RandomHorizon, n_replicates: u64, seed: u64) -> Result<McEstimate> {
    if let Some(rate) = model.arrivals.poisson_rate() {
        return Ok(McEstimate::exact(rate * tau.mean().to_f64()));
    }
    match *tau {
        RandomHorizon::Deterministic { t } => renewal_function_mc(&model.arrivals, t, n_replicates, seed),
        _ if !tau.mean().is_finite() => Ok(McEstimate::exact(f64::INFINITY)),
        _ => Ok(n_tau_moment(&model.arrivals, tau, 1.0, n_replicates, seed)?.estimate),
    }
}

/// `E N(τ)·Ḡ(x)`. Evaluated even when hypotheses fail; failures are listed.
pub fn asymptotic_approx(
    model: &RiskModel,
    x: f64,
    tau: &RandomHorizon,
    n_replicates: u64,
    seed: u64,
) -> Result<Approximation> {
    model.validate()?;
    tau.validate()?;
    let en = expected_claims(model, tau, n_replicates, seed)?;
    let tail = model.claims.marginal.tail(x);
    Ok(Approximation {
        value: en.mean * tail,
        stderr: en.stderr * tail,
        expected_claims: en,
        violations: model.hypothesis_violations(tau),
    })
}

/// One `(x, t)` cell of a uniformity scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanCell {
    pub x: f64,
    pub t: f64,
    pub psi: RuinEstimate,
    pub expected_claims: f64,
    pub approx: f64,
    pub ratio: f64,
    pub conclusive: bool,
}

impl ScanCell {
    pub fn deviation(&self) -> f64 {
        (self.ratio - 1.0).abs()
    }
}

/// `sup_t |ψ(x;t)/(E N(t)·Ḡ(x)) − 1|` over conclusive cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSupremum {
    pub x: f64,
    /// `None` when no cell at this `x` is conclusive.
    pub sup_deviation: Option<f64>,
    pub conclusive_cells: usize,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformScan {
    pub cells: Vec<ScanCell>,
    pub suprema: Vec<ScanSupremum>,
    pub violations: Vec<HypothesisViolation>,
}

impl UniformScan {
    pub fn conclusive_fraction(&self) -> f64 {
        let n = self.cells.iter().filter(|c| c.conclusive).count();
        n as f64 / self.cells.len().max(1) as f64
    }
}

/// `k` log-spaced horizons `μ_H·(x·g(x)/μ_H)^(i/k)`, `i = 1..k`.
pub fn scan_horizons(model: &RiskModel, g: &HorizonFunction, x: f64, k: usize) -> Result<Vec<f64>> {
    let mu = model.arrivals.mean_interarrival();
    let top = g.horizon(x);
    if !(top > mu) {
        return Err(Error::Grid(format!("x·g(x) = {top} at x = {x} does not exceed μ_H = {mu}")));
    }
    Ok((1..=k).map(|i| mu * (top / mu).powf(i as f64 / k as f64)).collect())
}

/// Ratios `ψ(x;t)/(E N(t)·Ḡ(x))` for `t ∈ (μ_H, x·g(x)]` at each `x`.
///
/// Uses the conditional estimator; every `x` draws from the same streams.
/// `E N(t)` is analytic for Poisson arrivals and otherwise simulated once
/// per horizon.
pub fn uniform_ratio_scan(
    model: &RiskModel,
    x_grid: &[f64],
    g: &HorizonFunction,
    t_points_per_x: usize,
    n_paths: u64,
    seed: u64,
) -> Result<UniformScan> {
    model.validate()?;
    g.validate()?;
    if x_grid.is_empty() || x_grid[0] <= 1.0 || x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid("x grid must be strictly ascending and above 1".into()));
    }
    if t_points_per_x == 0 {
        return Err(Error::Grid("need at least one horizon per x".into()));
    }
    let en_seed = derive_seed(seed, 1);
    let mut cells = Vec::new();
    let mut suprema = Vec::new();
    for &x in x_grid {
        let ts = scan_horizons(model, g, x, t_points_per_x)?;
        let surface = ruin_surface(model, &[x], &ts, n_paths, seed, Estimator::Conditional)?;
        let tail = model.claims.marginal.tail(x);
        let mut row = Vec::with_capacity(ts.len());
        for (it, &t) in ts.iter().enumerate() {
            let en = expected_claims(model, &RandomHorizon::Deterministic { t }, n_paths, en_seed)?.mean;
            let psi = *surface.get(0, it);
            let approx = en * tail;
            row.push(ScanCell {
                x,
                t,
                psi,
                expected_claims: en,
                approx,
                ratio: psi.p_hat / approx,
                conclusive: psi.is_conclusive(),
            });
        }
        let conclusive: Vec<f64> = row.iter().filter(|c| c.conclusive).map(|c| c.deviation()).collect();
        suprema.push(ScanSupremum {
            x,
            sup_deviation: conclusive.iter().copied().reduce(f64::max),
            conclusive_cells: conclusive.len(),
            cells: row.len(),
        });
        cells.extend(row);
    }
    Ok(UniformScan {
        cells,
        suprema,
        violations: model.structural_violations(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::DependenceSpec;
    use crate::renewal::ArrivalModel;
    use crate::ruin::ClaimModel;
    use crate::tails::TailModel;
    use approx::assert_relative_eq;

    fn reference() -> RiskModel {
        RiskModel::new(
            ClaimModel {
                marginal: TailModel::pareto(2.5, 1.0).unwrap(),
                dependence: DependenceSpec::Independent,
            },
            ArrivalModel::poisson(1.0).unwrap(),
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn approximant_formula() {
        let a = asymptotic_approx(&reference(), 40.0, &RandomHorizon::Deterministic { t: 10.0 }, 0, 0).unwrap();
        assert_relative_eq!(a.value, 10.0 * 40f64.powf(-2.5), max_relative = 1e-14);
        assert_relative_eq!(a.value, 9.882e-4, max_relative = 1e-3);
        assert!(a.violations.is_empty());
        let below = asymptotic_approx(&reference(), 0.5, &RandomHorizon::Deterministic { t: 10.0 }, 0, 0).unwrap();
        assert_eq!(below.value, 10.0);
        let heavy = RandomHorizon::Pareto { alpha: 1.5, xm: 1.0 };
        let flagged = asymptotic_approx(&reference(), 40.0, &heavy, 0, 0).unwrap();
        assert!(flagged.value.is_finite());
        assert!(matches!(flagged.violations[..], [HypothesisViolation::HorizonTail { .. }]));
    }

    #[test]
    fn approximant_for_renewal_arrivals_is_simulated() {
        let mut m = reference();
        m.arrivals = ArrivalModel::new(TailModel::weibull(0.5, 0.25).unwrap(), DependenceSpec::Independent).unwrap();
        m.premium_rate = 4.0;
        let a = asymptotic_approx(&m, 40.0, &RandomHorizon::Deterministic { t: 100.0 }, 20_000, 3).unwrap();
        assert!(a.stderr > 0.0);
        let renewal_limit = 100.0 / 0.5 * 40f64.powf(-2.5);
        assert!((a.value / renewal_limit - 1.0).abs() < 0.05, "{a:?}");
    }

    #[test]
    fn scan_grid_starts_above_mean_interarrival() {
        let g = HorizonFunction::power_log(2.0, 0.5);
        let ts = scan_horizons(&reference(), &g, 200.0, 12).unwrap();
        assert_eq!(ts.len(), 12);
        assert!(ts[0] > 1.0);
        assert_relative_eq!(ts[11], g.horizon(200.0), max_relative = 1e-12);
    }

    #[test]
    fn small_scan_is_well_formed() {
        let g = HorizonFunction::power_log(2.0, 0.5);
        let scan = uniform_ratio_scan(&reference(), &[50.0, 100.0], &g, 4, 4096, 9).unwrap();
        assert_eq!(scan.cells.len(), 8);
        assert_eq!(scan.conclusive_fraction(), 1.0);
        for c in &scan.cells {
            assert_relative_eq!(c.expected_claims, c.t, max_relative = 1e-14);
            assert!(c.ratio > 0.3 && c.ratio < 2.0, "{c:?}");
        }
    }
}
