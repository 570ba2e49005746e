use crate::dependence::{GrowthClass, Side};
use crate::error::{Error, HypothesisViolation, Result};
use crate::ruin::{horizon_condition_check, RiskModel};
use crate::tails::{log_grid, TailModel};

use super::config::{Experiment, ExperimentConfig};

/// Parameter errors (`Err`) and failed hypotheses (`Ok` with entries) of a
/// configuration. Nothing is simulated.
pub fn check(config: &ExperimentConfig) -> Result<Vec<HypothesisViolation>> {
    let mut out = Vec::new();
    match &config.experiment {
        Experiment::RuinFinite { model, x_grid, t_grid, .. } => {
            ruin_model(model, &mut out)?;
            ascending("x_grid", x_grid)?;
            ascending("t_grid", t_grid)?;
        }
        Experiment::RuinRandom { model, tau, x_grid } => {
            tau.validate()?;
            ruin_model(model, &mut out)?;
            ascending("x_grid", x_grid)?;
            for v in model.hypothesis_violations(tau) {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        Experiment::UniformScan {
            model,
            horizon_function,
            x_grid,
            t_points_per_x,
        } => {
            ruin_model(model, &mut out)?;
            horizon_function.validate()?;
            ascending("x_grid", x_grid)?;
            if *t_points_per_x == 0 {
                return Err(Error::param("t_points_per_x must be positive"));
            }
            let lo = x_grid[0].max(std::f64::consts::E);
            let grid = log_grid(lo, lo * 1e12, 64);
            if !horizon_condition_check(horizon_function, &grid)? {
                out.push(HypothesisViolation::HorizonFunction {
                    function: horizon_function.to_string(),
                });
            }
        }
        Experiment::LdEnod { model, gamma, n_grid } => {
            structural(model, &mut out)?;
            sample_sizes(n_grid)?;
            resolve_gamma(model, *gamma)?;
            let growth = model.claims.dependence.growth(Side::Upper);
            if !matches!(growth, GrowthClass::Bounded { .. }) {
                out.push(HypothesisViolation::ClaimCoefficientBounded {
                    growth: growth.to_string(),
                });
            }
        }
        Experiment::LdWuod {
            model,
            gamma,
            r,
            n_grid,
            probe,
        } => {
            structural(model, &mut out)?;
            sample_sizes(n_grid)?;
            resolve_gamma(model, *gamma)?;
            let TailModel::Pareto { alpha, .. } = model.claims.marginal else {
                return Err(Error::Unsupported(format!(
                    "ld_wuod needs Pareto claims; got {}",
                    model.claims.marginal
                )));
            };
            if !(*r > 1.0 && *r < alpha) {
                return Err(Error::param(format!("r = {r} must lie in (1, {alpha})")));
            }
            let growth = model.claims.dependence.growth(Side::Upper);
            if !growth.is_at_most_polynomial() {
                let v = HypothesisViolation::ClaimCoefficientGrowth {
                    growth: growth.to_string(),
                    moment_index: alpha,
                };
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            if let Some(p) = probe {
                if !(p.v > 0.0) || !(p.theta > 0.0 && p.theta < 1.0) {
                    return Err(Error::param("probe needs v > 0 and 0 < theta < 1"));
                }
                ascending("probe.x_grid", &p.x_grid)?;
            }
        }
        Experiment::RenewalMoments {
            arrivals,
            t_grid,
            q_grid,
            truncated,
            horizons,
        } => {
            arrivals.validate()?;
            ascending("t_grid", t_grid)?;
            ascending("truncated.t_grid", &truncated.t_grid)?;
            if q_grid.iter().any(|&q| !(q >= 1.0)) {
                return Err(Error::param("every q must be at least 1"));
            }
            if !(truncated.r >= 0.0) || !(truncated.delta > 0.0) {
                return Err(Error::param("truncated moment needs r >= 0 and delta > 0"));
            }
            for h in horizons {
                h.tau.validate()?;
                if !(h.p >= 1.0) {
                    return Err(Error::param("horizon moment order p must be at least 1"));
                }
            }
            out.extend(arrivals.growth_violation());
        }
        Experiment::DependenceAudit {
            marginal,
            dependence,
            thresholds,
            moment_dimension,
        } => {
            marginal.validate()?;
            dependence.validate()?;
            if !(2..=6).contains(&thresholds.len()) {
                return Err(Error::param("thresholds must have 2 to 6 entries"));
            }
            if !(1..=6).contains(moment_dimension) {
                return Err(Error::param("moment_dimension must lie in [1, 6]"));
            }
        }
        Experiment::TailDiagnostics { models } => {
            if models.is_empty() {
                return Err(Error::param("models must not be empty"));
            }
            for m in models {
                m.validate()?;
            }
        }
    }
    Ok(out)
}

fn structural(model: &RiskModel, out: &mut Vec<HypothesisViolation>) -> Result<()> {
    model.claims.marginal.validate()?;
    model.claims.dependence.validate()?;
    model.arrivals.validate()?;
    if !(model.premium_rate > 0.0) {
        return Err(Error::param("premium_rate must be positive"));
    }
    out.extend(model.structural_violations());
    Ok(())
}

fn ruin_model(model: &RiskModel, out: &mut Vec<HypothesisViolation>) -> Result<()> {
    structural(model, out)?;
    out.extend(model.safety_violation());
    Ok(())
}

fn ascending(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid(format!("{name} must be nonempty, positive and strictly ascending")));
    }
    Ok(())
}

fn sample_sizes(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("n_grid must be nonempty, positive and strictly ascending".into()));
    }
    Ok(())
}

/// `γ`, defaulting to `2·μ_G`; must exceed `μ_G`.
pub fn resolve_gamma(model: &RiskModel, gamma: Option<f64>) -> Result<f64> {
    let mu = model.claims.marginal.finite_mean()?;
    let gamma = gamma.unwrap_or(2.0 * mu);
    if !(gamma > mu) {
        return Err(Error::param(format!("gamma = {gamma} must exceed the claim mean {mu}")));
    }
    Ok(gamma)
}
