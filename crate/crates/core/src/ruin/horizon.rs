use std::f64::consts::E;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::renewal::ArrivalModel;
use crate::tails::TailModel;

/// Minimum grid size for [`horizon_condition_check`].
pub const MIN_CONDITION_GRID: usize = 32;

fn one() -> f64 {
    1.0
}

/// `g(x) = k·(ln x)^a·x^(−b)`, defined for `x > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonFunction {
    #[serde(default = "one")]
    pub scale: f64,
    pub log_power: f64,
    pub decay_power: f64,
}

impl HorizonFunction {
    pub fn power_log(log_power: f64, decay_power: f64) -> Self {
        Self {
            scale: 1.0,
            log_power,
            decay_power,
        }
    }

    pub fn with_scale(self, scale: f64) -> Self {
        Self { scale, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::param("horizon function scale must be positive"));
        }
        if !(self.log_power.is_finite() && self.decay_power.is_finite()) {
            return Err(Error::param("horizon function powers must be finite"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.scale * x.ln().powf(self.log_power) * x.powf(-self.decay_power)
    }

    /// The largest horizon `x·g(x)` covered at capital `x`.
    pub fn horizon(&self, x: f64) -> f64 {
        x * self.eval(x)
    }

    /// `ln x / (x·g(x))`.
    pub fn condition_ratio(&self, x: f64) -> f64 {
        x.ln() / self.horizon(x)
    }

    /// Point beyond which `g` strictly decreases, if it eventually does.
    pub fn decreasing_from(&self) -> Option<f64> {
        let (a, b) = (self.log_power, self.decay_power);
        // g'/g = (a/ln x − b)/x
        if b > 0.0 {
            Some(if a > 0.0 { (a / b).exp() } else { 1.0 })
        } else if b == 0.0 && a < 0.0 {
            Some(1.0)
        } else {
            None
        }
    }
}

impl fmt::Display for HorizonFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale != 1.0 {
            write!(f, "{}·", self.scale)?;
        }
        write!(f, "(ln x)^{}·x^(-{})", self.log_power, self.decay_power)
    }
}

/// Whether `ln x/(x·g(x))` decreases toward 0 on the grid.
///
/// The grid must contain at least 32 ascending points above 1. The ratio
/// must peak in the first half of the grid, strictly decrease after the
/// peak, and end at most a tenth of the peak.
pub fn horizon_condition_check(g: &HorizonFunction, x_grid: &[f64]) -> Result<bool> {
    g.validate()?;
    if x_grid.len() < MIN_CONDITION_GRID {
        return Err(Error::Grid(format!("need at least {MIN_CONDITION_GRID} grid points")));
    }
    if x_grid[0] <= 1.0 || x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid("grid must be strictly ascending and above 1".into()));
    }
    let phi: Vec<f64> = x_grid.iter().map(|&x| g.condition_ratio(x)).collect();
    if phi.iter().any(|v| !v.is_finite()) {
        return Ok(false);
    }
    let (peak, max) = phi
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(i, m), (j, &v)| if v > m { (j, v) } else { (i, m) });
    let decreasing = phi[peak..].windows(2).all(|w| w[1] < w[0]);
    Ok(peak < phi.len() / 2 && decreasing && phi[phi.len() - 1] <= 0.1 * max)
}

/// Threshold `f(x)` on inter-arrival times with
/// `H̄(f(x)) = ln x/(x·g₀(x))`, `g₀ = g₂/(μ_H(p+b+1))`, and `f = 1` below
/// activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdFunction {
    pub arrivals: TailModel,
    pub mean_interarrival: f64,
    pub p: f64,
    pub b: f64,
    pub g2: HorizonFunction,
}

impl ThresholdFunction {
    /// Requires `p > J_G^+` and `b > 0`.
    pub fn new(arrivals: &ArrivalModel, claims: &TailModel, p: f64, b: f64, g2: HorizonFunction) -> Result<Self> {
        arrivals.validate()?;
        g2.validate()?;
        let j_plus = claims.indices().j_plus;
        if !(ExtReal::Finite(p) > j_plus) {
            return Err(Error::param(format!("p = {p} must exceed the upper Matuszewska index {j_plus}")));
        }
        if !(b > 0.0) {
            return Err(Error::param("b must be positive"));
        }
        Ok(Self {
            arrivals: arrivals.marginal,
            mean_interarrival: arrivals.mean_interarrival(),
            p,
            b,
            g2,
        })
    }

    /// `e` for Pareto inter-arrivals, `e^e` otherwise.
    pub fn activation(&self) -> f64 {
        match self.arrivals {
            TailModel::Pareto { .. } => E,
            _ => E.powf(E),
        }
    }

    pub fn g0(&self, x: f64) -> f64 {
        self.g2.eval(x) / (self.mean_interarrival * (self.p + self.b + 1.0))
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.activation() {
            return 1.0;
        }
        let u = x.ln() / (x * self.g0(x));
        if !(u > 0.0 && u < 1.0) {
            return 1.0;
        }
        self.arrivals.tail_quantile(u)
    }
}

pub fn threshold_f(f: &ThresholdFunction, x: f64) -> f64 {
    f.eval(x)
}

/// `f(x)/(x·g₂(x))` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallnessReport {
    pub x_grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub strictly_decreasing: bool,
}

impl SmallnessReport {
    pub fn final_ratio(&self) -> f64 {
        *self.ratios.last().expect("nonempty grid")
    }
}

pub fn threshold_smallness_check(f: &ThresholdFunction, x_grid: &[f64]) -> Result<SmallnessReport> {
    if x_grid.len() < 2 || x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid("grid must have at least 2 strictly ascending points".into()));
    }
    let ratios: Vec<f64> = x_grid.iter().map(|&x| f.eval(x) / f.g2.horizon(x)).collect();
    let strictly_decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    Ok(SmallnessReport {
        x_grid: x_grid.to_vec(),
        ratios,
        strictly_decreasing,
    })
}
