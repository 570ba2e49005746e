//! Surplus paths and ruin probability estimators.
//!
//! A path draws from a single random stream, alternating the inter-arrival
//! gap and the claim it triggers, so the path up to any horizon is a prefix
//! of the path up to a longer one. Every cell of a `(x, t)` grid is estimated
//! from the same paths.

use rand::Rng;
use serde::Serialize;

use crate::dependence::DependentUniforms;
use crate::error::{Error, Result};
use crate::estimate::{Estimator, HitCounter, MomentAccumulator, RuinEstimate};
use crate::renewal::{ArrivalStream, RandomHorizon, MAX_ARRIVALS};
use crate::stream::{par_fold, path_rng, Merge};

use super::model::RiskModel;

/// Smallest path count accepted by the single-cell estimators.
pub const MIN_PATHS: u64 = 10_000;

/// Claim and arrival generators for one path.
struct PathSource {
    arrivals: ArrivalStream,
    claims: DependentUniforms,
}

impl PathSource {
    fn new(model: &RiskModel) -> Self {
        Self {
            arrivals: ArrivalStream::new(&model.arrivals),
            claims: DependentUniforms::new(model.claims.dependence),
        }
    }
}

/// Claims arriving by a horizon.
#[derive(Debug, Default, Clone)]
pub struct PathBuffer {
    /// Arrival epochs.
    pub times: Vec<f64>,
    /// Claim sizes.
    pub claims: Vec<f64>,
    /// Survival-scale uniform of each claim.
    pub survival: Vec<f64>,
    /// Survival-scale uniform of the coupled partner, `NaN` when uncoupled.
    pub partner: Vec<f64>,
    /// Net loss after each claim, `R_k = Σ_{i≤k} (Y_i − c·Z_i)`.
    pub net_loss: Vec<f64>,
}

impl PathBuffer {
    fn clear(&mut self) {
        self.times.clear();
        self.claims.clear();
        self.survival.clear();
        self.partner.clear();
        self.net_loss.clear();
    }

    pub fn len(&self) -> usize {
        self.claims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.claims.is_empty()
    }

    /// `N(t)` for `t` up to the simulated horizon.
    pub fn count_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t)
    }
}

/// Fills `buf` with every claim arriving by `horizon`.
pub fn simulate_path<R: Rng + ?Sized>(model: &RiskModel, horizon: f64, rng: &mut R, buf: &mut PathBuffer) -> Result<()> {
    buf.clear();
    let mut src = PathSource::new(model);
    let g = model.claims.marginal;
    let c = model.premium_rate;
    let mut time = 0.0;
    let mut loss = 0.0;
    loop {
        let gap = src.arrivals.next_gap(rng);
        time += gap;
        if time > horizon {
            return Ok(());
        }
        let draw = src.claims.next(rng);
        let y = g.tail_quantile(draw.survival);
        loss += y - c * gap;
        buf.times.push(time);
        buf.claims.push(y);
        buf.survival.push(draw.survival);
        buf.partner.push(draw.partner.unwrap_or(f64::NAN));
        buf.net_loss.push(loss);
        if buf.times.len() as u64 >= MAX_ARRIVALS {
            return Err(Error::ArrivalCap {
                cap: MAX_ARRIVALS,
                horizon,
            });
        }
    }
}

/// Whether `max_{0≤n≤N(t)} Σ_{i≤n} X_i > x` on one path.
pub fn simulate_surplus_path(model: &RiskModel, x: f64, t: f64, seed: u64) -> Result<bool> {
    if !(x >= 0.0) || !(t >= 0.0) {
        return Err(Error::pre("require x >= 0 and t >= 0"));
    }
    model.validate()?;
    let mut rng = path_rng(seed, 0);
    Ok(running_max_at(model, &[t], &mut rng)?[0] > x)
}

/// Running maximum of the net loss at each (ascending) horizon in `ts`.
fn running_max_at<R: Rng + ?Sized>(model: &RiskModel, ts: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ts.len());
    let t_max = match ts.last() {
        Some(&t) => t,
        None => return Ok(out),
    };
    let mut src = PathSource::new(model);
    let g = model.claims.marginal;
    let c = model.premium_rate;
    let (mut time, mut loss, mut max, mut count) = (0.0, 0.0, 0.0f64, 0u64);
    loop {
        let gap = src.arrivals.next_gap(rng);
        time += gap;
        while out.len() < ts.len() && time > ts[out.len()] {
            out.push(max);
        }
        if time > t_max {
            return Ok(out);
        }
        let y = g.tail_quantile(src.claims.next(rng).survival);
        loss += y - c * gap;
        max = max.max(loss);
        count += 1;
        if count >= MAX_ARRIVALS {
            return Err(Error::ArrivalCap {
                cap: MAX_ARRIVALS,
                horizon: t_max,
            });
        }
    }
}

/// Per-path scratch for the conditional estimator.
#[derive(Default)]
struct ConditionalScratch {
    prefix_max: Vec<f64>,
    suffix_max: Vec<f64>,
}

/// `Σ_j P(ruin, Y_j = max_i Y_i | all variables except Y_j)` over the
/// first `n` claims of `buf`, for each threshold in `xs`.
///
/// Given the rest of the path, ruin together with `Y_j` being the largest
/// claim is the event `Y_j > w_j`; only the coupled partner of `Y_j`
/// affects its conditional law.
fn conditional_terms(
    model: &RiskModel,
    buf: &PathBuffer,
    n: usize,
    xs: &[f64],
    scratch: &mut ConditionalScratch,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    if n == 0 {
        return;
    }
    let g = model.claims.marginal;
    let theta = model.claims.dependence.theta();
    let r = &buf.net_loss[..n];
    let y = &buf.claims[..n];
    scratch.prefix_max.clear();
    let mut run = 0.0f64;
    for &rk in r {
        scratch.prefix_max.push(run);
        run = run.max(rk);
    }
    scratch.suffix_max.clear();
    scratch.suffix_max.resize(n, 0.0);
    let mut run = f64::NEG_INFINITY;
    for k in (0..n).rev() {
        run = run.max(r[k]);
        scratch.suffix_max[k] = run;
    }
    // Claims are positive, so 0 stands in for "no other claim".
    let (mut top, mut second, mut top_idx) = (0.0f64, 0.0f64, usize::MAX);
    for (k, &v) in y.iter().enumerate() {
        if v > top {
            second = top;
            top = v;
            top_idx = k;
        } else if v > second {
            second = v;
        }
    }
    #[allow(clippy::needless_range_loop)]
    for j in 0..n {
        let others = if j == top_idx { second } else { top };
        let before = scratch.prefix_max[j];
        let after = scratch.suffix_max[j] - y[j];
        let partner = buf.partner[j];
        for (acc, &x) in out.iter_mut().zip(xs) {
            let w = if before > x { others } else { others.max(x - after) };
            let s = g.tail(w);
            *acc += if partner.is_nan() {
                s
            } else {
                crate::dependence::fgm_conditional_cdf(theta, s, partner)
            };
        }
    }
}

/// Ruin probability estimates on an `x × t` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuinSurface {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    /// Row-major by `x`.
    pub cells: Vec<RuinEstimate>,
}

impl RuinSurface {
    pub fn get(&self, ix: usize, it: usize) -> &RuinEstimate {
        &self.cells[ix * self.ts.len() + it]
    }
}

struct Cells<A> {
    cells: Vec<A>,
    error: Option<Error>,
}

impl<A: Merge> Merge for Cells<A> {
    fn merge(self, other: Self) -> Self {
        Self {
            cells: self.cells.merge(other.cells),
            error: self.error.or(other.error),
        }
    }
}

fn check_grid(xs: &[f64], ts: &[f64]) -> Result<()> {
    if xs.is_empty() || ts.is_empty() {
        return Err(Error::Grid("x and t grids must be nonempty".into()));
    }
    if xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Grid("capital levels must be finite and nonnegative".into()));
    }
    if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Grid("horizons must be finite, nonnegative and ascending".into()));
    }
    Ok(())
}

/// `ψ(x; t)` for every `x` in `xs` and ascending `t` in `ts`, from common
/// paths.
pub fn ruin_surface(
    model: &RiskModel,
    xs: &[f64],
    ts: &[f64],
    n_paths: u64,
    seed: u64,
    estimator: Estimator,
) -> Result<RuinSurface> {
    model.validate()?;
    check_grid(xs, ts)?;
    if n_paths == 0 {
        return Err(Error::pre("n_paths must be positive"));
    }
    let nt = ts.len();
    let n_cells = xs.len() * nt;
    let cells = match estimator {
        Estimator::Crude => {
            let out = par_fold(n_paths, |range| {
                let mut acc = Cells {
                    cells: vec![HitCounter::default(); n_cells],
                    error: None,
                };
                for i in range {
                    let maxima = match running_max_at(model, ts, &mut path_rng(seed, i)) {
                        Ok(m) => m,
                        Err(e) => {
                            acc.error = Some(e);
                            break;
                        }
                    };
                    for (ix, &x) in xs.iter().enumerate() {
                        for (it, &m) in maxima.iter().enumerate() {
                            let cell = &mut acc.cells[ix * nt + it];
                            cell.hits += (m > x) as u64;
                            cell.n += 1;
                        }
                    }
                }
                acc
            });
            if let Some(e) = out.error {
                return Err(e);
            }
            out.cells.iter().map(|c| RuinEstimate::from_hits(c.hits, c.n)).collect()
        }
        Estimator::Conditional => {
            let t_max = ts[nt - 1];
            let out = par_fold(n_paths, |range| {
                let mut acc = Cells {
                    cells: vec![MomentAccumulator::default(); n_cells],
                    error: None,
                };
                let mut buf = PathBuffer::default();
                let mut scratch = ConditionalScratch::default();
                let mut terms = vec![0.0; xs.len()];
                for i in range {
                    if let Err(e) = simulate_path(model, t_max, &mut path_rng(seed, i), &mut buf) {
                        acc.error = Some(e);
                        break;
                    }
                    for (it, &t) in ts.iter().enumerate() {
                        let n = buf.count_at(t);
                        conditional_terms(model, &buf, n, xs, &mut scratch, &mut terms);
                        for (ix, &v) in terms.iter().enumerate() {
                            acc.cells[ix * nt + it].push(v);
                        }
                    }
                }
                acc
            });
            if let Some(e) = out.error {
                return Err(e);
            }
            out.cells
                .iter()
                .map(|c| RuinEstimate::from_moments(c, Estimator::Conditional))
                .collect()
        }
    };
    Ok(RuinSurface {
        xs: xs.to_vec(),
        ts: ts.to_vec(),
        cells,
    })
}

/// Crude estimate of `ψ(x; t)`.
pub fn ruin_prob_finite(model: &RiskModel, x: f64, t: f64, n_paths: u64, seed: u64) -> Result<RuinEstimate> {
    if n_paths < MIN_PATHS {
        return Err(Error::pre(format!("n_paths must be at least {MIN_PATHS}")));
    }
    Ok(ruin_surface(model, &[x], &[t], n_paths, seed, Estimator::Crude)?.cells[0])
}

/// Crude estimates of `ψ(x; τ)` for each `x`, with `τ` drawn per path ahead
/// of the claims and arrivals.
pub fn ruin_curve_random(
    model: &RiskModel,
    xs: &[f64],
    tau: &RandomHorizon,
    n_paths: u64,
    seed: u64,
) -> Result<Vec<RuinEstimate>> {
    model.validate()?;
    tau.validate()?;
    check_grid(xs, &[0.0])?;
    if n_paths < MIN_PATHS {
        return Err(Error::pre(format!("n_paths must be at least {MIN_PATHS}")));
    }
    let out = par_fold(n_paths, |range| {
        let mut acc = Cells {
            cells: vec![HitCounter::default(); xs.len()],
            error: None,
        };
        for i in range {
            let mut rng = path_rng(seed, i);
            let horizon = tau.sample(&mut rng);
            let max = match running_max_at(model, &[horizon], &mut rng) {
                Ok(m) => m[0],
                Err(e) => {
                    acc.error = Some(e);
                    break;
                }
            };
            for (cell, &x) in acc.cells.iter_mut().zip(xs) {
                cell.hits += (max > x) as u64;
                cell.n += 1;
            }
        }
        acc
    });
    if let Some(e) = out.error {
        return Err(e);
    }
    Ok(out.cells.iter().map(|c| RuinEstimate::from_hits(c.hits, c.n)).collect())
}

pub fn ruin_prob_random(model: &RiskModel, x: f64, tau: &RandomHorizon, n_paths: u64, seed: u64) -> Result<RuinEstimate> {
    Ok(ruin_curve_random(model, &[x], tau, n_paths, seed)?[0])
}
