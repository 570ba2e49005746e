//! Moment-weight functions for the centered claim `ξ = Y − μ_G` and the
//! tail inequality they control.

use serde::Serialize;

use crate::dependence::Side;
use crate::error::{Error, Result};
use crate::estimate::Estimator;
use crate::ext::ExtReal;
use crate::quad::{integrate_pieces, integrate_upper, Tolerance};
use crate::ruin::ClaimModel;
use crate::stream::derive_seed;
use crate::tails::TailModel;

use super::sums::weighted_sum_curve;

/// Breakpoints stop once they pass this value or this count.
const BREAKPOINT_LIMIT: f64 = 1e15;
const MAX_BREAKPOINTS: usize = 256;

const TOL: Tolerance = Tolerance::new(0.0, 1e-9);

/// `s = s₁·s₂` with `s₁(x) = |x|^(r−1)` and `s₂ = min(s₁^(l₀−1), s₃)`, where
/// the step function `s₃` equals 1 on `[0, x₁)` and `n` on `[x_n, x_{n+1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SFunctionPair {
    pub r: f64,
    pub l0: f64,
    /// `x_1 < x_2 < ...`; `s₃` stays at its last level beyond the final one.
    pub breakpoints: Vec<f64>,
    pub marginal: TailModel,
    pub mean: f64,
}

impl SFunctionPair {
    pub fn s1(&self, x: f64) -> f64 {
        x.abs().powf(self.r - 1.0)
    }

    pub fn s3(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= x.abs());
        k.max(1) as f64
    }

    pub fn s2(&self, x: f64) -> f64 {
        self.s1(x).powf(self.l0 - 1.0).min(self.s3(x))
    }

    pub fn s(&self, x: f64) -> f64 {
        self.s1(x) * self.s2(x)
    }

    /// `P(ξ > x)`.
    pub fn centered_tail(&self, x: f64) -> f64 {
        self.marginal.tail(x + self.mean)
    }

    /// `E ξ^r 1{ξ ≥ x}` for `x > 0`, by parts:
    /// `x^r V̄(x) + r∫_x^∞ y^(r−1) V̄(y) dy`.
    pub fn tail_moment(&self, x: f64) -> Result<f64> {
        let r = self.r;
        let head = x.powf(r) * self.centered_tail(x);
        let rest = integrate_upper(|y| y.powf(r - 1.0) * self.centered_tail(y), x, Tolerance::new(0.0, 1e-10))?;
        Ok(head + r * rest)
    }

    /// `E ξ s₁(ξ) 1{a ≤ ξ < b}` for `0 ≤ a < b`.
    pub fn block_moment(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.tail_moment(a)? - self.tail_moment(b)?)
    }
}

/// Builds the pair for `E|ξ|^r < ∞`.
///
/// `l₀` is the midpoint of `(1, min(r, 2))`. Each breakpoint is the least of
/// the candidates above `n² + 1` and the previous breakpoint with
/// `E ξ^r 1{ξ ≥ x_n} ≤ n^(−3)/2`, which bounds the block moments by `n^(−3)`.
pub fn construct_s_pair(r: f64, marginal: &TailModel) -> Result<SFunctionPair> {
    marginal.validate()?;
    let index = marginal.indices().moment_index;
    if !(r > 1.0) || !(ExtReal::Finite(r) < index) {
        return Err(Error::param(format!("r = {r} must lie in (1, {index})")));
    }
    let mean = marginal.finite_mean()?;
    let mut pair = SFunctionPair {
        r,
        l0: 0.5 * r.min(2.0) + 0.5,
        breakpoints: Vec::new(),
        marginal: *marginal,
        mean,
    };
    let mut prev = 0.0f64;
    for n in 1..=MAX_BREAKPOINTS {
        let nf = n as f64;
        let target = 0.5 * nf.powi(-3);
        let floor = (nf * nf + 1.0).max(prev * (1.0 + 1e-9) + 1e-9);
        let x = if pair.tail_moment(floor)? <= target {
            floor
        } else {
            solve_tail_moment(&pair, floor, target)?
        };
        if x > BREAKPOINT_LIMIT {
            break;
        }
        pair.breakpoints.push(x);
        prev = x;
    }
    Ok(pair)
}

/// Smallest `x ≥ lo` (to 1e-10 relative) with `T(x) ≤ target`.
fn solve_tail_moment(pair: &SFunctionPair, lo: f64, target: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, lo * 2.0);
    while pair.tail_moment(b)? > target {
        a = b;
        b *= 2.0;
        if b > 1e300 {
            return Err(Error::Unsupported("tail moment does not vanish".into()));
        }
    }
    while (b - a) > 1e-10 * b {
        let mid = (a * b).sqrt();
        if pair.tail_moment(mid)? > target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(b)
}

/// `V⁺_s(x) = s(x)^(−1)∫_{0≤y≤x} y s(y) V(dy) + x V̄(x)` for `x > 0`.
pub fn v_plus(pair: &SFunctionPair, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::pre("x must be positive"));
    }
    let g = pair.marginal;
    let lo = (g.support_min() - pair.mean).max(0.0);
    let tail_term = x * pair.centered_tail(x);
    if lo >= x {
        return Ok(tail_term);
    }
    let mut points = vec![lo];
    points.extend(pair.breakpoints.iter().copied().filter(|&b| b > lo && b < x));
    points.push(x);
    let integral = integrate_pieces(|y| y * pair.s(y) * g.density(y + pair.mean), &points, TOL)?;
    Ok(integral / pair.s(x) + tail_term)
}

/// One cell of [`tail_inequality_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeCell {
    pub n: usize,
    pub x: f64,
    /// Estimate of `P(ξ_1 + ... + ξ_n > x)`.
    pub p_hat: f64,
    pub stderr: f64,
    /// `n·V̄(vx)`.
    pub single_term: f64,
    /// `g_U(n)·V⁺_s(vx)^((1−θ)/v)`.
    pub dependence_term: f64,
    /// Smallest `C` for which this cell satisfies the bound.
    pub required_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    /// Smallest `C` covering every cell; `None` when some cell admits none.
    pub fitted_c: Option<f64>,
    pub cells: Vec<ProbeCell>,
    /// Cells whose excess cannot be absorbed by any finite `C`.
    pub violations: Vec<(usize, f64)>,
}

/// Fits the constant in
/// `P(Σξ_i > x) ≤ n·V̄(vx) + C·g_U(n)·V⁺_s(vx)^((1−θ)/v)`
/// over grid cells with `x ≥ γn`, allowing three standard errors.
#[allow(clippy::too_many_arguments)]
pub fn tail_inequality_probe(
    claims: &ClaimModel,
    pair: &SFunctionPair,
    v: f64,
    theta: f64,
    gamma: f64,
    n_grid: &[usize],
    x_grid: &[f64],
    n_paths: u64,
    seed: u64,
) -> Result<ProbeReport> {
    if !(v > 0.0) || !(theta > 0.0 && theta < 1.0) || !(gamma > 0.0) {
        return Err(Error::param("require v > 0, 0 < θ < 1 and γ > 0"));
    }
    if claims.marginal != pair.marginal {
        return Err(Error::param("s-function pair was built for a different marginal"));
    }
    let mu = pair.mean;
    let exponent = (1.0 - theta) / v;
    let mut cells = Vec::new();
    for &n in n_grid {
        if n == 0 {
            return Err(Error::Grid("n must be positive".into()));
        }
        let xs: Vec<f64> = x_grid.iter().copied().filter(|&x| x >= gamma * n as f64).collect();
        if xs.is_empty() {
            continue;
        }
        let shifted: Vec<f64> = xs.iter().map(|x| x + mu * n as f64).collect();
        let est = weighted_sum_curve(
            claims,
            &vec![1.0; n],
            &shifted,
            n_paths,
            derive_seed(seed, n as u64),
            Estimator::Conditional,
        )?;
        let coefficient = claims.dependence.coefficient(n as u64, Side::Upper);
        for (&x, p) in xs.iter().zip(est) {
            let single_term = n as f64 * pair.centered_tail(v * x);
            let dependence_term = coefficient * v_plus(pair, v * x)?.powf(exponent);
            let excess = p.p_hat - 3.0 * p.stderr - single_term;
            let required_c = if excess <= 0.0 {
                0.0
            } else if dependence_term > 0.0 {
                excess / dependence_term
            } else {
                f64::INFINITY
            };
            cells.push(ProbeCell {
                n,
                x,
                p_hat: p.p_hat,
                stderr: p.stderr,
                single_term,
                dependence_term,
                required_c,
            });
        }
    }
    let violations: Vec<(usize, f64)> = cells
        .iter()
        .filter(|c| !c.required_c.is_finite())
        .map(|c| (c.n, c.x))
        .collect();
    let fitted_c = violations
        .is_empty()
        .then(|| cells.iter().map(|c| c.required_c).fold(0.0, f64::max));
    Ok(ProbeReport {
        fitted_c,
        cells,
        violations,
    })
}
