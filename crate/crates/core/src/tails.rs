//! Heavy-tailed marginal distributions and numerical class diagnostics.
//!
//! The diagnostics return raw numbers. Deciding whether a trend across a
//! grid counts as membership in a class is left to the caller.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::{erf, gamma};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::quad::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailModel {
    /// `P(X > x) = (xm/x)^alpha` for `x >= xm`.
    Pareto { alpha: f64, xm: f64 },
    /// `P(X > x) = exp(-(x/scale)^shape)` with `shape` in (0, 1).
    Weibull { shape: f64, scale: f64 },
    Exponential { rate: f64 },
    Lognormal { mu: f64, sigma: f64 },
}

/// Matuszewska indices, moment index and `L_V = lim_{y↓1} Ḡ_*(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailIndices {
    pub j_plus: ExtReal,
    pub j_minus: ExtReal,
    pub moment_index: ExtReal,
    pub l_v: f64,
}

impl TailIndices {
    /// Dominated variation is equivalent to a finite upper index.
    pub fn in_class_d(&self) -> bool {
        self.j_plus.is_finite()
    }
}

/// How `x^{-p}` compares with the tail as `x → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerComparison {
    /// `x^{-p} = o(Ḡ(x))`.
    TailDominatesPower,
    /// `Ḡ(x) = o(x^{-p})`.
    PowerDominatesTail,
    Inconclusive,
}

impl TailModel {
    pub fn pareto(alpha: f64, xm: f64) -> Result<Self> {
        Self::Pareto { alpha, xm }.validated()
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::Weibull { shape, scale }.validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::Lognormal { mu, sigma }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks parameter ranges; deserialized models must pass through here.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(format!("{self}: {name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            TailModel::Pareto { alpha, xm } => {
                positive("alpha", alpha)?;
                positive("xm", xm)
            }
            TailModel::Weibull { shape, scale } => {
                if !(shape > 0.0 && shape < 1.0) {
                    return Err(Error::param(format!("{self}: shape must lie in (0, 1)")));
                }
                positive("scale", scale)
            }
            TailModel::Exponential { rate } => positive("rate", rate),
            TailModel::Lognormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::param(format!("{self}: mu must be finite")));
                }
                positive("sigma", sigma)
            }
        }
    }

    /// Infimum of the support.
    pub fn support_min(&self) -> f64 {
        match *self {
            TailModel::Pareto { xm, .. } => xm,
            _ => 0.0,
        }
    }

    /// `P(X > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        match *self {
            TailModel::Pareto { alpha, xm } => {
                if x < xm {
                    1.0
                } else {
                    (xm / x).powf(alpha)
                }
            }
            TailModel::Weibull { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(x / scale).powf(shape)).exp()
                }
            }
            TailModel::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            TailModel::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    0.5 * erf::erfc((x.ln() - mu) / (sigma * SQRT_2))
                }
            }
        }
    }

    /// `ln P(X > x)`, accurate far beyond the underflow point of [`tail`](Self::tail).
    pub fn log_tail(&self, x: f64) -> f64 {
        match *self {
            TailModel::Pareto { alpha, xm } => {
                if x < xm {
                    0.0
                } else {
                    alpha * (xm / x).ln()
                }
            }
            TailModel::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(x / scale).powf(shape)
                }
            }
            TailModel::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -rate * x
                }
            }
            TailModel::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let z = (x.ln() - mu) / (sigma * SQRT_2);
                let t = 0.5 * erf::erfc(z);
                if t > 1e-300 {
                    t.ln()
                } else {
                    // Asymptotic expansion of erfc.
                    let z2 = z * z;
                    -z2 - (z * PI.sqrt()).ln() + (1.0 - 0.5 / z2 + 0.75 / (z2 * z2)).ln() - 2f64.ln()
                }
            }
        }
    }

    /// `P(X <= x)`, without cancellation for small probabilities.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            TailModel::Pareto { .. } => 1.0 - self.tail(x),
            TailModel::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            TailModel::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            TailModel::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    0.5 * erf::erfc(-(x.ln() - mu) / (sigma * SQRT_2))
                }
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            TailModel::Pareto { alpha, xm } => {
                if x < xm {
                    0.0
                } else {
                    alpha / x * (xm / x).powf(alpha)
                }
            }
            TailModel::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let r = (x / scale).powf(shape);
                    shape / x * r * (-r).exp()
                }
            }
            TailModel::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            TailModel::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let w = (x.ln() - mu) / sigma;
                    (-0.5 * w * w).exp() / (x * sigma * (2.0 * PI).sqrt())
                }
            }
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            TailModel::Pareto { alpha, xm } => {
                if x < xm {
                    f64::NEG_INFINITY
                } else {
                    (alpha / x).ln() + alpha * (xm / x).ln()
                }
            }
            TailModel::Weibull { shape, scale } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let r = (x / scale).powf(shape);
                    (shape / x).ln() + r.ln() - r
                }
            }
            TailModel::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - rate * x
                }
            }
            TailModel::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let w = (x.ln() - mu) / sigma;
                    -0.5 * w * w - (x * sigma * (2.0 * PI).sqrt()).ln()
                }
            }
        }
    }

    /// Inverse of the tail: the `x` with `P(X > x) = u`, for `u` in (0, 1].
    pub fn tail_quantile(&self, u: f64) -> f64 {
        match *self {
            TailModel::Pareto { alpha, xm } => xm * (-u.ln() / alpha).exp(),
            TailModel::Weibull { shape, scale } => scale * (-u.ln()).powf(1.0 / shape),
            TailModel::Exponential { rate } => -u.ln() / rate,
            TailModel::Lognormal { mu, sigma } => {
                if u >= 1.0 {
                    return 0.0;
                }
                let mut z = mu + sigma * SQRT_2 * erf::erfc_inv(2.0 * u);
                let target = u.ln();
                for _ in 0..3 {
                    let x = z.exp();
                    let lt = self.log_tail(x);
                    let w = (z - mu) / sigma;
                    // d/dz ln P(X > e^z) = -φ(w)/(σ·tail)
                    let slope = -(-0.5 * w * w - lt).exp() / (sigma * (2.0 * PI).sqrt());
                    if !(slope.is_finite() && slope < 0.0) {
                        break;
                    }
                    let step = (lt - target) / slope;
                    z -= step;
                    if step.abs() <= 1e-15 * z.abs().max(1.0) {
                        break;
                    }
                }
                z.exp()
            }
        }
    }

    /// Ordinary quantile: the `x` with `P(X <= x) = p`.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            TailModel::Pareto { alpha, xm } => xm * (-(-p).ln_1p() / alpha).exp(),
            TailModel::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            TailModel::Exponential { rate } => -(-p).ln_1p() / rate,
            TailModel::Lognormal { .. } => self.tail_quantile(1.0 - p),
        }
    }

    pub fn mean(&self) -> ExtReal {
        self.moment(1.0)
    }

    /// `E[X^p]` for `p > 0`.
    pub fn moment(&self, p: f64) -> ExtReal {
        match *self {
            TailModel::Pareto { alpha, xm } => {
                if p < alpha {
                    ExtReal::Finite(alpha * xm.powf(p) / (alpha - p))
                } else {
                    ExtReal::Infinite
                }
            }
            TailModel::Weibull { shape, scale } => {
                ExtReal::Finite(scale.powf(p) * gamma::gamma(1.0 + p / shape))
            }
            TailModel::Exponential { rate } => ExtReal::Finite(gamma::gamma(1.0 + p) / rate.powf(p)),
            TailModel::Lognormal { mu, sigma } => {
                ExtReal::Finite((p * mu + 0.5 * p * p * sigma * sigma).exp())
            }
        }
    }

    /// The finite mean, or [`Error::InfiniteMean`].
    pub fn finite_mean(&self) -> Result<f64> {
        self.mean().finite().ok_or(Error::InfiniteMean)
    }

    pub fn indices(&self) -> TailIndices {
        match *self {
            TailModel::Pareto { alpha, .. } => TailIndices {
                j_plus: ExtReal::Finite(alpha),
                j_minus: ExtReal::Finite(alpha),
                moment_index: ExtReal::Finite(alpha),
                l_v: 1.0,
            },
            _ => TailIndices {
                j_plus: ExtReal::Infinite,
                j_minus: ExtReal::Infinite,
                moment_index: ExtReal::Infinite,
                l_v: 0.0,
            },
        }
    }

    /// Consistent variation, decided from the family. Of the supported
    /// families only Pareto qualifies.
    pub fn is_consistently_varying(&self) -> bool {
        matches!(self, TailModel::Pareto { .. })
    }
}

impl fmt::Display for TailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailModel::Pareto { alpha, xm } => write!(f, "Pareto(alpha={alpha}, xm={xm})"),
            TailModel::Weibull { shape, scale } => write!(f, "Weibull(shape={shape}, scale={scale})"),
            TailModel::Exponential { rate } => write!(f, "Exponential(rate={rate})"),
            TailModel::Lognormal { mu, sigma } => write!(f, "Lognormal(mu={mu}, sigma={sigma})"),
        }
    }
}

pub fn tail_eval(model: &TailModel, x: f64) -> f64 {
    model.tail(x)
}

pub fn mean_value(model: &TailModel) -> ExtReal {
    model.mean()
}

pub fn matuszewska_indices(model: &TailModel) -> TailIndices {
    model.indices()
}

/// Lower and upper proxies for `Ḡ_*(y)` and `Ḡ^*(y)`: the min and max of
/// `Ḡ(xy)/Ḡ(x)` over the top half of an ascending grid.
pub fn star_ratio(model: &TailModel, y: f64, x_grid: &[f64]) -> Result<(f64, f64)> {
    if x_grid.len() < 4 {
        return Err(Error::Grid(format!("need at least 4 grid points, got {}", x_grid.len())));
    }
    if !(y > 0.0) {
        return Err(Error::param("y must be positive"));
    }
    if x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid("grid must be strictly ascending".into()));
    }
    if x_grid[0] <= model.support_min() {
        return Err(Error::Grid("grid must lie above the support infimum".into()));
    }
    let (lo, hi) = x_grid[x_grid.len() / 2..]
        .iter()
        .map(|&x| (model.log_tail(x * y) - model.log_tail(x)).exp())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok((lo, hi))
}

/// Ratio denominators: `x` above the support with `Ḡ(x)` representable.
fn check_above_support(model: &TailModel, x: f64) -> Result<()> {
    if !(x > model.support_min() && x.is_finite()) {
        return Err(Error::pre(format!("x = {x} must exceed the support infimum of {model}")));
    }
    if model.tail(x) == 0.0 {
        return Err(Error::pre(format!("tail of {model} underflows at x = {x}")));
    }
    Ok(())
}

/// `∫_{Ḡ(hi) ≤ s ≤ Ḡ(lo)} Ḡ(x − Q(s)) ds`, i.e. `∫_{lo}^{hi} Ḡ(x−y) G(dy)`
/// written on the survival scale so that no density is needed.
fn tail_against_law(model: &TailModel, x: f64, lo: f64, hi: f64, abs: f64) -> Result<f64> {
    let s_hi = model.tail(lo);
    let s_lo = model.tail(hi);
    if s_hi <= s_lo {
        return Ok(0.0);
    }
    quad::integrate(
        |s| model.tail(x - model.tail_quantile(s).min(hi)),
        s_lo,
        s_hi,
        Tolerance::new(abs, 1e-10),
    )
}

/// `P(X₁ + X₂ > x) / (2 Ḡ(x))` for independent copies, by numerical
/// convolution split at `x/2`.
pub fn convolution_tail_ratio(model: &TailModel, x: f64) -> Result<f64> {
    check_above_support(model, x)?;
    Ok(convolution_tail(model, x)? / (2.0 * model.tail(x)))
}

/// `P(X₁ + X₂ > x)` for independent copies.
pub fn convolution_tail(model: &TailModel, x: f64) -> Result<f64> {
    let half = 0.5 * x;
    let t_half = model.tail(half);
    let scale = 1e-12 * model.tail(x);
    let side = tail_against_law(model, x, model.support_min(), half, scale)?;
    Ok(t_half * t_half + 2.0 * side)
}

/// `∫₀ˣ Ḡ(x−y)Ḡ(y)dy / (2 μ Ḡ(x))`.
pub fn sstar_integral_ratio(model: &TailModel, x: f64) -> Result<f64> {
    let mean = model.finite_mean()?;
    check_above_support(model, x)?;
    let half = 0.5 * x;
    let xm = model.support_min();
    let mut points = vec![0.0, half];
    for p in [xm, x - xm] {
        if p > 0.0 && p < half {
            points.push(p);
        }
    }
    points.sort_by(f64::total_cmp);
    let tol = Tolerance::new(1e-14 * model.tail(x), 1e-10);
    let integral = 2.0 * quad::integrate_pieces(|y| model.tail(x - y) * model.tail(y), &points, tol)?;
    Ok(integral / (2.0 * mean * model.tail(x)))
}

/// `∫_{h}^{x−h} Ḡ(x−y) G(dy) / Ḡ(x)` with `h = x^{h_exponent}`.
pub fn insensitivity_integral(model: &TailModel, h_exponent: f64, x: f64) -> Result<f64> {
    if !(h_exponent > 0.0 && h_exponent < 1.0) {
        return Err(Error::param("h_exponent must lie in (0, 1)"));
    }
    let h = x.powf(h_exponent);
    if !(h < x - h) {
        return Err(Error::pre(format!("empty range: h(x) = {h} >= x - h(x) at x = {x}")));
    }
    check_above_support(model, x)?;
    let tx = model.tail(x);
    Ok(tail_against_law(model, x, h, x - h, 1e-12 * tx)? / tx)
}

/// Compares `x^{-p}` with the tail using the analytic indices.
pub fn power_bound_check(model: &TailModel, p: f64) -> PowerComparison {
    let idx = model.indices();
    if ExtReal::Finite(p) < idx.j_minus {
        PowerComparison::PowerDominatesTail
    } else if ExtReal::Finite(p) > idx.j_plus {
        PowerComparison::TailDominatesPower
    } else {
        PowerComparison::Inconclusive
    }
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        a
                    } else if i + 1 == n {
                        b
                    } else {
                        (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Fixed-grid trend checks standing in for class membership.
///
/// Levels are `x₀·2^k`, `k = 0..4`, with `x₀ = 50·max(1, median)`.
/// Tolerances:
/// - C: lower star proxy at `y = 1.5, 1.1, 1.01` increases and ends above 0.95.
/// - D: upper star proxy at `y = 2` on grids `[10, 10^k]`, `k = 2..5`, ends
///   above 1e-3 and keeps at least half its first value.
/// - S: `|convolution ratio − 1|` is nonincreasing and ends inside `[0.98, 1.1]`.
/// - S*: `|S* ratio − 1|` is nonincreasing and ends below 0.15; `None` for an
///   infinite mean.
/// - Insensitivity (`h = x^0.5`): strictly decreasing, ending below 0.05.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDiagnostics {
    pub levels: Vec<f64>,
    pub c_lower_star: Vec<f64>,
    pub d_upper_star: Vec<f64>,
    pub convolution_ratio: Vec<f64>,
    pub sstar_ratio: Option<Vec<f64>>,
    pub insensitivity: Vec<f64>,
    pub in_c: bool,
    pub in_d: bool,
    pub in_s: bool,
    pub in_s_star: Option<bool>,
    pub insensitive: bool,
}

pub fn class_diagnostics(model: &TailModel) -> Result<ClassDiagnostics> {
    model.validate()?;
    let x0 = 50.0 * model.quantile(0.5).max(1.0);
    let levels: Vec<f64> = (0..4).map(|k| x0 * f64::from(1 << k)).collect();
    let lo = 10.0 * model.support_min().max(1.0);

    let c_grid = log_grid(lo, lo * 1e4, 24);
    let c_lower_star = [1.5, 1.1, 1.01]
        .iter()
        .map(|&y| star_ratio(model, y, &c_grid).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let d_upper_star = (2..=5)
        .map(|k| star_ratio(model, 2.0, &log_grid(lo, lo * 10f64.powi(k - 1), 16)).map(|r| r.1))
        .collect::<Result<Vec<_>>>()?;
    let convolution_ratio = levels
        .iter()
        .map(|&x| convolution_tail_ratio(model, x))
        .collect::<Result<Vec<_>>>()?;
    let sstar_ratio = if model.mean().is_finite() {
        Some(levels.iter().map(|&x| sstar_integral_ratio(model, x)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    let insensitivity = levels
        .iter()
        .map(|&x| insensitivity_integral(model, 0.5, x))
        .collect::<Result<Vec<_>>>()?;

    let settles = |v: &[f64]| v.windows(2).all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs());
    let last = |v: &[f64]| v[v.len() - 1];
    let in_c = c_lower_star.windows(2).all(|w| w[1] >= w[0]) && last(&c_lower_star) > 0.95;
    let in_d = last(&d_upper_star) > 1e-3 && last(&d_upper_star) >= 0.5 * d_upper_star[0];
    let in_s = settles(&convolution_ratio) && (0.98..=1.1).contains(&last(&convolution_ratio));
    // Stretched-exponential tails approach 1 slowly; a steady contraction counts.
    let in_s_star = sstar_ratio.as_ref().map(|v| {
        let (prev, fin) = ((v[v.len() - 2] - 1.0).abs(), (last(v) - 1.0).abs());
        settles(v) && (fin < 0.15 || (fin < 0.5 && fin <= 0.75 * prev))
    });
    let insensitive = insensitivity.windows(2).all(|w| w[1] < w[0]) && last(&insensitivity) < 0.05;
    Ok(ClassDiagnostics {
        levels,
        c_lower_star,
        d_upper_star,
        convolution_ratio,
        sstar_ratio,
        insensitivity,
        in_c,
        in_d,
        in_s,
        in_s_star,
        insensitive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pareto() -> TailModel {
        TailModel::pareto(2.5, 1.0).unwrap()
    }

    fn families() -> Vec<TailModel> {
        vec![
            pareto(),
            TailModel::weibull(0.5, 1.0).unwrap(),
            TailModel::exponential(1.0).unwrap(),
            TailModel::lognormal(0.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn closed_form_tails() {
        assert_eq!(tail_eval(&pareto(), 4.0), 0.03125);
        assert_eq!(tail_eval(&pareto(), 0.5), 1.0);
        assert_relative_eq!(
            tail_eval(&TailModel::weibull(0.5, 1.0).unwrap(), 4.0),
            (-2f64).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn means() {
        assert_eq!(mean_value(&pareto()), ExtReal::Finite(2.5 / 1.5));
        assert_eq!(mean_value(&TailModel::exponential(1.0).unwrap()), ExtReal::Finite(1.0));
        assert_eq!(mean_value(&TailModel::pareto(0.9, 1.0).unwrap()), ExtReal::Infinite);
        assert_relative_eq!(
            mean_value(&TailModel::weibull(0.5, 1.0).unwrap()).to_f64(),
            2.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(TailModel::pareto(-1.0, 1.0).is_err());
        assert!(TailModel::weibull(1.0, 1.0).is_err());
        assert!(TailModel::exponential(0.0).is_err());
        assert!(TailModel::lognormal(0.0, f64::NAN).is_err());
    }

    #[test]
    fn indices_per_family() {
        let p = matuszewska_indices(&pareto());
        assert_eq!(p.j_plus, ExtReal::Finite(2.5));
        assert_eq!(p.j_minus, ExtReal::Finite(2.5));
        assert_eq!(p.moment_index, ExtReal::Finite(2.5));
        let ln = matuszewska_indices(&TailModel::lognormal(0.0, 1.0).unwrap());
        assert!(!ln.in_class_d());
        assert_eq!(ln.moment_index, ExtReal::Infinite);
        let ex = matuszewska_indices(&TailModel::exponential(1.0).unwrap());
        assert_eq!(ex.j_plus, ExtReal::Infinite);
        assert_eq!(ex.moment_index, ExtReal::Infinite);
    }

    #[test]
    fn star_ratio_cases() {
        let grid = log_grid(10.0, 1e4, 16);
        let (lo, hi) = star_ratio(&pareto(), 2.0, &grid).unwrap();
        assert_relative_eq!(lo, 2f64.powf(-2.5), max_relative = 1e-12);
        assert_relative_eq!(hi, 2f64.powf(-2.5), max_relative = 1e-12);
        for m in families() {
            let g: Vec<f64> = grid.iter().map(|x| x + m.support_min()).collect();
            assert_eq!(star_ratio(&m, 1.0, &g).unwrap(), (1.0, 1.0));
        }
        assert!(matches!(star_ratio(&pareto(), 2.0, &grid[..3]), Err(Error::Grid(_))));
    }

    #[test]
    fn lognormal_upper_star_vanishes_on_extending_grids() {
        let ln = TailModel::lognormal(0.0, 1.0).unwrap();
        let ups: Vec<f64> = [1e2, 1e4, 1e8, 1e16]
            .iter()
            .map(|&top| star_ratio(&ln, 2.0, &log_grid(10.0, top, 16)).unwrap().1)
            .collect();
        assert!(ups.windows(2).all(|w| w[1] < w[0]), "{ups:?}");
        assert!(ups[3] < 1e-3);
    }

    #[test]
    fn convolution_ratio_exponential_closed_form() {
        // Gamma(2,1) tail e^{-x}(1+x), so the ratio is (1+x)/2.
        let r = convolution_tail_ratio(&TailModel::exponential(1.0).unwrap(), 50.0).unwrap();
        assert_relative_eq!(r, 25.5, max_relative = 1e-9);
        let exp = TailModel::exponential(1.0).unwrap();
        assert!(matches!(convolution_tail_ratio(&exp, 1000.0), Err(Error::Precondition(_))));
        assert!(matches!(insensitivity_integral(&exp, 0.5, 1000.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn convolution_ratio_pareto() {
        let r = convolution_tail_ratio(&pareto(), 1e3).unwrap();
        assert!((0.98..=1.1).contains(&r), "{r}");
        let small = convolution_tail_ratio(&pareto(), 1.5).unwrap();
        assert!(small.is_finite() && small > 0.0);
        // Below 2·xm the sum always exceeds x.
        assert_relative_eq!(small, 1.0 / (2.0 * 1.5f64.powf(-2.5)), max_relative = 1e-12);
    }

    #[test]
    fn convolution_matches_independent_density_route() {
        // Route 2: ∫ Ḡ(x−y) g(y) dy over [xm, x − xm] plus Ḡ(x − xm) mass terms.
        let m = pareto();
        let x = 20.0;
        let direct = m.tail(x)
            + quad::integrate(|y| m.tail(x - y) * m.density(y), 1.0, x - 1.0, Tolerance::new(0.0, 1e-12))
                .unwrap()
            + (m.cdf(x) - m.cdf(x - 1.0));
        assert_relative_eq!(convolution_tail(&m, x).unwrap(), direct, max_relative = 1e-9);
    }

    #[test]
    fn sstar_cases() {
        let r = sstar_integral_ratio(&pareto(), 1e3).unwrap();
        assert!((r - 1.0).abs() < 0.15, "{r}");
        let e = sstar_integral_ratio(&TailModel::exponential(1.0).unwrap(), 50.0).unwrap();
        assert_relative_eq!(e, 25.0, max_relative = 1e-9);
        let small = sstar_integral_ratio(&pareto(), 10.0).unwrap();
        assert!(small.is_finite() && small > 0.0);
        assert!(matches!(
            sstar_integral_ratio(&TailModel::pareto(0.9, 1.0).unwrap(), 10.0),
            Err(Error::InfiniteMean)
        ));
    }

    #[test]
    fn insensitivity_cases() {
        let v = insensitivity_integral(&pareto(), 0.5, 1e4).unwrap();
        assert!(v < 0.05, "{v}");
        let trend: Vec<f64> = [1e2, 1e3, 1e4, 1e5, 1e6]
            .iter()
            .map(|&x| insensitivity_integral(&pareto(), 0.5, x).unwrap())
            .collect();
        assert!(trend.windows(2).all(|w| w[1] < w[0]), "{trend:?}");
        assert!(matches!(insensitivity_integral(&pareto(), 0.5, 3.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn class_witnesses() {
        let p = class_diagnostics(&pareto()).unwrap();
        assert!(p.in_c && p.in_d && p.in_s && p.in_s_star == Some(true) && p.insensitive, "{p:?}");
        let e = class_diagnostics(&TailModel::exponential(1.0).unwrap()).unwrap();
        assert!(!e.in_s && !e.in_c && !e.in_d && e.in_s_star == Some(false), "{e:?}");
        let l = class_diagnostics(&TailModel::lognormal(0.0, 1.0).unwrap()).unwrap();
        assert!(!l.in_d && !l.in_c, "{l:?}");
        let w = class_diagnostics(&TailModel::weibull(0.5, 1.0).unwrap()).unwrap();
        assert!(w.in_s && w.in_s_star == Some(true) && !w.in_d, "{w:?}");
        let heavy = class_diagnostics(&TailModel::pareto(0.8, 1.0).unwrap()).unwrap();
        assert!(heavy.sstar_ratio.is_none() && heavy.in_c);
    }

    #[test]
    fn power_comparisons() {
        assert_eq!(power_bound_check(&pareto(), 2.0), PowerComparison::PowerDominatesTail);
        assert_eq!(power_bound_check(&pareto(), 3.0), PowerComparison::TailDominatesPower);
        assert_eq!(power_bound_check(&pareto(), 2.5), PowerComparison::Inconclusive);
        let e = TailModel::exponential(1.0).unwrap();
        assert_eq!(power_bound_check(&e, 50.0), PowerComparison::PowerDominatesTail);
    }

    #[test]
    fn pareto_power_products_at_large_x() {
        // x^p Ḡ(x) = x^{p-α} exactly; at x = 10^6 a gap of 0.6 already
        // clears 10^3 in either direction.
        let x: f64 = 1e6;
        for p in [1.0, 1.5, 1.9] {
            assert!(x.powf(p) * pareto().tail(x) < 1e-3);
        }
        for p in [3.1, 3.5, 4.0] {
            assert!(x.powf(p) * pareto().tail(x) > 1e3);
        }
        for p in [2.0, 2.3, 2.6, 3.0] {
            assert_relative_eq!(x.powf(p) * pareto().tail(x), x.powf(p - 2.5), max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn tail_quantile_inverts_tail(u in 1e-12f64..0.999_999, which in 0usize..4) {
            let m = families()[which];
            let back = m.tail(m.tail_quantile(u));
            prop_assert!((back - u).abs() <= 1e-12 * u, "{} u={} back={}", m, u, back);
        }

        #[test]
        fn log_grid_hits_both_endpoints(a in 1e-3f64..1e3, span in 1.0f64..1e6, n in 2usize..64) {
            let g = log_grid(a, a * span, n);
            prop_assert_eq!(g[0], a);
            prop_assert_eq!(g[n - 1], a * span);
            prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn tail_is_monotone(a in 0.0f64..1e4, d in 0.0f64..1e3, which in 0usize..4) {
            let m = families()[which];
            prop_assert!(m.tail(a + d) <= m.tail(a));
            prop_assert!((m.tail(a) + m.cdf(a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn log_density_matches_density(x in 1.01f64..500.0, which in 0usize..4) {
            let m = families()[which];
            let d = m.density(x);
            prop_assert!((m.log_density(x) - d.ln()).abs() <= 1e-9 * d.ln().abs().max(1.0));
        }

        #[test]
        fn index_ordering(alpha in 0.1f64..20.0, xm in 0.1f64..10.0) {
            let i = TailModel::pareto(alpha, xm).unwrap().indices();
            prop_assert!(i.j_minus <= i.moment_index && i.moment_index <= i.j_plus);
        }
    }
}
