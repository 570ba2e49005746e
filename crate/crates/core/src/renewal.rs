//! Counting processes driven by dependent inter-arrival times.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dependence::{DependenceSpec, DependentUniforms, PairRole, Side};
use crate::error::{Error, HypothesisViolation, Result};
use crate::estimate::{Estimator, HitCounter, McEstimate, MomentAccumulator, RuinEstimate};
use crate::ext::ExtReal;
use crate::stream::{par_fold, path_rng, uniform, CompensatedSum, Merge};
use crate::tails::TailModel;

/// Hard cap on arrivals generated for a single path.
pub const MAX_ARRIVALS: u64 = 100_000_000;

/// Inter-arrival marginal `H` with its (lower-orthant) dependence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalModel {
    pub marginal: TailModel,
    pub dependence: DependenceSpec,
}

impl ArrivalModel {
    pub fn new(marginal: TailModel, dependence: DependenceSpec) -> Result<Self> {
        let model = Self { marginal, dependence };
        model.validate()?;
        Ok(model)
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        Self::new(TailModel::exponential(rate)?, DependenceSpec::Independent)
    }

    pub fn validate(&self) -> Result<()> {
        self.marginal.validate()?;
        self.dependence.validate()?;
        match self.marginal.mean() {
            ExtReal::Finite(m) if m > 0.0 => Ok(()),
            _ => Err(Error::param(format!(
                "inter-arrival law {} must have a finite positive mean",
                self.marginal
            ))),
        }
    }

    /// `μ_H`.
    pub fn mean_interarrival(&self) -> f64 {
        self.marginal.mean().to_f64()
    }

    /// The rate when arrivals form a Poisson process.
    pub fn poisson_rate(&self) -> Option<f64> {
        match (self.marginal, self.dependence) {
            (TailModel::Exponential { rate }, DependenceSpec::Independent) => Some(rate),
            _ => None,
        }
    }

    /// `g_L(n) = o(n^b)` for some `b > 0`; `None` when satisfied.
    pub fn growth_violation(&self) -> Option<HypothesisViolation> {
        let growth = self.dependence.growth(Side::Lower);
        (!growth.is_at_most_polynomial()).then(|| HypothesisViolation::ArrivalCoefficientGrowth {
            growth: growth.to_string(),
        })
    }
}

/// Sequential inter-arrival times for one path.
#[derive(Debug, Clone)]
pub struct ArrivalStream {
    marginal: TailModel,
    gen: DependentUniforms,
}

impl ArrivalStream {
    pub fn new(model: &ArrivalModel) -> Self {
        Self {
            marginal: model.marginal,
            gen: DependentUniforms::new(model.dependence),
        }
    }

    #[inline]
    pub fn next_gap<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        self.marginal.tail_quantile(self.gen.next(rng).survival)
    }
}

/// Arrival epochs up to a horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingPath {
    pub arrival_times: Vec<f64>,
    pub horizon: f64,
}

impl CountingPath {
    /// `N(t) = #{arrivals <= t}`.
    pub fn count_at(&self, t: f64) -> u64 {
        self.arrival_times.partition_point(|&s| s <= t) as u64
    }
}

/// `N(horizon)` for one path.
pub fn count_arrivals<R: Rng + ?Sized>(model: &ArrivalModel, horizon: f64, rng: &mut R) -> Result<u64> {
    let mut stream = ArrivalStream::new(model);
    let mut time = 0.0;
    let mut count = 0u64;
    loop {
        time += stream.next_gap(rng);
        if time > horizon {
            return Ok(count);
        }
        count += 1;
        if count >= MAX_ARRIVALS {
            return Err(Error::ArrivalCap {
                cap: MAX_ARRIVALS,
                horizon,
            });
        }
    }
}

pub fn simulate_arrivals(model: &ArrivalModel, horizon: f64, seed: u64) -> Result<CountingPath> {
    if !(horizon > 0.0) {
        return Err(Error::pre("horizon must be positive"));
    }
    model.validate()?;
    let mut rng = path_rng(seed, 0);
    let mut stream = ArrivalStream::new(model);
    let mut times = Vec::new();
    let mut time = 0.0;
    loop {
        time += stream.next_gap(&mut rng);
        if time > horizon {
            break;
        }
        times.push(time);
        if times.len() as u64 >= MAX_ARRIVALS {
            return Err(Error::ArrivalCap {
                cap: MAX_ARRIVALS,
                horizon,
            });
        }
    }
    Ok(CountingPath {
        arrival_times: times,
        horizon,
    })
}

#[derive(Default)]
struct Fallible<A> {
    acc: A,
    error: Option<Error>,
}

impl<A: Merge> Merge for Fallible<A> {
    fn merge(self, other: Self) -> Self {
        Self {
            acc: self.acc.merge(other.acc),
            error: self.error.or(other.error),
        }
    }
}

impl<A> Fallible<A> {
    fn into_result(self) -> Result<A> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.acc),
        }
    }
}

/// Per-replicate statistic `f(N(t))`, averaged.
fn mc_over_counts<F>(model: &ArrivalModel, t: f64, n_replicates: u64, seed: u64, f: F) -> Result<McEstimate>
where
    F: Fn(u64) -> f64 + Sync,
{
    let out = par_fold(n_replicates, |range| {
        let mut out = Fallible::<MomentAccumulator>::default();
        for i in range {
            match count_arrivals(model, t, &mut path_rng(seed, i)) {
                Ok(n) => out.acc.push(f(n)),
                Err(e) => {
                    out.error = Some(e);
                    break;
                }
            }
        }
        out
    });
    Ok(out.into_result()?.estimate())
}

/// `λ(t) = E N(t)`; exact for Poisson arrivals.
pub fn renewal_function_mc(model: &ArrivalModel, t: f64, n_replicates: u64, seed: u64) -> Result<McEstimate> {
    if !(t > 0.0) {
        return Err(Error::pre("t must be positive"));
    }
    model.validate()?;
    if let Some(rate) = model.poisson_rate() {
        return Ok(McEstimate::exact(rate * t));
    }
    mc_over_counts(model, t, n_replicates, seed, |n| n as f64)
}

/// `ln P(N = k)` for `N ~ Poisson(lambda)`.
fn poisson_ln_pmf(lambda: f64, k: u64) -> f64 {
    let k = k as f64;
    k * lambda.ln() - lambda - ln_gamma(k + 1.0)
}

/// `E N^q` for `N ~ Poisson(lambda)`, by direct summation of the pmf.
pub fn poisson_moment(lambda: f64, q: f64) -> f64 {
    let hi = (lambda + 40.0 * lambda.sqrt() + 50.0).ceil() as u64;
    let mut sum = CompensatedSum::default();
    for k in 1..=hi {
        sum.add((poisson_ln_pmf(lambda, k) + q * (k as f64).ln()).exp());
    }
    sum.value()
}

/// `P(N > k)` for `N ~ Poisson(lambda)`, summed upward in log space so that
/// deep tails do not cancel.
pub fn poisson_sf(lambda: f64, k: u64) -> f64 {
    let mut sum = CompensatedSum::default();
    let mut j = k + 1;
    loop {
        let term = poisson_ln_pmf(lambda, j).exp();
        sum.add(term);
        if (j as f64) > lambda && term <= 1e-18 * sum.value() {
            break;
        }
        if term == 0.0 && (j as f64) > lambda {
            break;
        }
        j += 1;
    }
    sum.value()
}

/// `E N^q(t) / (t/μ_H)^q`.
pub fn moment_q_ratio(model: &ArrivalModel, q: f64, t: f64, n_replicates: u64, seed: u64) -> Result<McEstimate> {
    if !(q >= 1.0) {
        return Err(Error::param("q must be at least 1"));
    }
    if !(t > 0.0) {
        return Err(Error::pre("t must be positive"));
    }
    model.validate()?;
    let scale = (t / model.mean_interarrival()).powf(q);
    if let Some(rate) = model.poisson_rate() {
        return Ok(McEstimate::exact(poisson_moment(rate * t, q) / scale));
    }
    mc_over_counts(model, t, n_replicates, seed, |n| (n as f64).powf(q) / scale)
}

/// Estimate of `E e^{rN(t)} 1{N(t) > (1+δ)t/μ_H}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedMoment {
    pub estimate: McEstimate,
    /// `(1+δ) t / μ_H`.
    pub threshold: f64,
    /// Replicates with `rN(t) > 700`; they contribute nothing to the
    /// estimate.
    pub saturated: u64,
    /// Scale factor of the importance-sampling proposal.
    pub tilt: f64,
}

#[derive(Default)]
struct TiltAccumulator {
    moments: MomentAccumulator,
    saturated: u64,
}

impl Merge for TiltAccumulator {
    fn merge(self, other: Self) -> Self {
        Self {
            moments: self.moments.merge(other.moments),
            saturated: self.saturated + other.saturated,
        }
    }
}

const SATURATION: f64 = 700.0;

/// Importance-sampled truncated exponential moment.
///
/// Inter-arrival times are proposed i.i.d. from the marginal scaled by
/// `κ = 1/(1 + min(δ, 1))`, which makes the event `N(t) > (1+δ)t/μ_H` typical.
/// The likelihood ratio covers the `N(t) + 1` gaps that decide `N(t)`,
/// including the FGM density of every pair completed among them.
pub fn truncated_exp_moment(
    model: &ArrivalModel,
    r: f64,
    delta: f64,
    t: f64,
    n_replicates: u64,
    seed: u64,
) -> Result<TruncatedMoment> {
    if !(r >= 0.0) || !(delta > 0.0) || !(t > 0.0) {
        return Err(Error::pre("require r >= 0, delta > 0 and t > 0"));
    }
    model.validate()?;
    let h = model.marginal;
    let spec = model.dependence;
    let theta = spec.theta();
    let threshold = (1.0 + delta) * t / model.mean_interarrival();
    let kappa = 1.0 / (1.0 + delta.min(1.0));
    let ln_kappa = kappa.ln();
    let out = par_fold(n_replicates, |range| {
        let mut out = Fallible::<TiltAccumulator>::default();
        let mut survivals: Vec<f64> = Vec::new();
        for i in range {
            let mut rng = path_rng(seed, i);
            survivals.clear();
            let mut time = 0.0;
            let mut log_w = 0.0;
            let mut count = 0u64;
            loop {
                let z = kappa * h.tail_quantile(uniform(&mut rng));
                log_w += h.log_density(z) - h.log_density(z / kappa) + ln_kappa;
                let s = h.tail(z);
                let index = survivals.len() as u64 + 1;
                if spec.role(index) == PairRole::Second {
                    let prev = survivals[survivals.len() - 1];
                    log_w += (1.0 + theta * (1.0 - 2.0 * prev) * (1.0 - 2.0 * s)).ln();
                }
                survivals.push(s);
                time += z;
                if time > t {
                    break;
                }
                count += 1;
                if count >= MAX_ARRIVALS {
                    out.error = Some(Error::ArrivalCap {
                        cap: MAX_ARRIVALS,
                        horizon: t,
                    });
                    return out;
                }
            }
            let n = count as f64;
            if n <= threshold {
                out.acc.moments.push(0.0);
            } else if r * n > SATURATION {
                out.acc.saturated += 1;
                out.acc.moments.push(0.0);
            } else {
                out.acc.moments.push((log_w + r * n).exp());
            }
        }
        out
    });
    let acc = out.into_result()?;
    Ok(TruncatedMoment {
        estimate: acc.moments.estimate(),
        threshold,
        saturated: acc.saturated,
        tilt: kappa,
    })
}

/// Operating horizon `τ`, independent of claims and arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RandomHorizon {
    Deterministic { t: f64 },
    Exponential { rate: f64 },
    Pareto { alpha: f64, xm: f64 },
}

impl RandomHorizon {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RandomHorizon::Deterministic { t } => {
                if t.is_finite() && t > 0.0 {
                    Ok(())
                } else {
                    Err(Error::param("deterministic horizon must be positive"))
                }
            }
            RandomHorizon::Exponential { rate } => TailModel::exponential(rate).map(|_| ()),
            RandomHorizon::Pareto { alpha, xm } => TailModel::pareto(alpha, xm).map(|_| ()),
        }
    }

    fn law(&self) -> Option<TailModel> {
        match *self {
            RandomHorizon::Deterministic { .. } => None,
            RandomHorizon::Exponential { rate } => Some(TailModel::Exponential { rate }),
            RandomHorizon::Pareto { alpha, xm } => Some(TailModel::Pareto { alpha, xm }),
        }
    }

    /// Draws `τ`; a deterministic horizon consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match (self, self.law()) {
            (RandomHorizon::Deterministic { t }, _) => *t,
            (_, Some(law)) => law.tail_quantile(uniform(rng)),
            _ => unreachable!(),
        }
    }

    pub fn tail(&self, x: f64) -> f64 {
        match (self, self.law()) {
            (RandomHorizon::Deterministic { t }, _) => (x < *t) as u8 as f64,
            (_, Some(law)) => law.tail(x),
            _ => unreachable!(),
        }
    }

    /// `E τ^p`.
    pub fn moment(&self, p: f64) -> ExtReal {
        match (self, self.law()) {
            (RandomHorizon::Deterministic { t }, _) => ExtReal::Finite(t.powf(p)),
            (_, Some(law)) => law.moment(p),
            _ => unreachable!(),
        }
    }

    pub fn mean(&self) -> ExtReal {
        self.moment(1.0)
    }

    /// Whether `P(τ > x) = o(Ḡ(x))`, decided from the two families.
    pub fn negligible_vs(&self, claims: &TailModel) -> bool {
        match (*self, *claims) {
            (RandomHorizon::Deterministic { .. }, _) => true,
            (RandomHorizon::Exponential { rate }, TailModel::Exponential { rate: claim_rate }) => rate > claim_rate,
            (RandomHorizon::Exponential { .. }, _) => true,
            (RandomHorizon::Pareto { alpha, .. }, TailModel::Pareto { alpha: claim_alpha, .. }) => alpha > claim_alpha,
            (RandomHorizon::Pareto { .. }, _) => false,
        }
    }

    pub fn tail_violation(&self, claims: &TailModel) -> Option<HypothesisViolation> {
        (!self.negligible_vs(claims)).then(|| HypothesisViolation::HorizonTail {
            horizon: self.to_string(),
            claims: claims.to_string(),
        })
    }
}

impl fmt::Display for RandomHorizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RandomHorizon::Deterministic { t } => write!(f, "deterministic({t})"),
            RandomHorizon::Exponential { rate } => write!(f, "Exponential(rate={rate})"),
            RandomHorizon::Pareto { alpha, xm } => write!(f, "Pareto(alpha={alpha}, xm={xm})"),
        }
    }
}

/// `E N^p(τ)` with divergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NTauMoment {
    pub estimate: McEstimate,
    /// Analytic `E τ^p`; finite exactly when `E N^p(τ)` is.
    pub tau_moment: ExtReal,
    /// `(replicates, cumulative mean)` at doubling checkpoints.
    pub checkpoints: Vec<(u64, f64)>,
    /// Least-squares slope of log cumulative mean against log replicates.
    pub growth_slope: f64,
    /// Hill estimate of the tail index of `N^p(τ)` from the top `⌈√n⌉`
    /// replicates; infinite when the sample has no spread there.
    pub tail_index: f64,
    /// `tail_index < 1`: the sample mean has no finite limit.
    pub diverging: bool,
}

/// Fewest replicates for which the Hill estimate is attempted.
pub const MIN_HILL_REPLICATES: u64 = 1000;

struct ChunkSums {
    accs: Vec<MomentAccumulator>,
    values: Vec<f64>,
}

impl Merge for ChunkSums {
    fn merge(mut self, other: Self) -> Self {
        self.accs.extend(other.accs);
        self.values.extend(other.values);
        self
    }
}

/// Hill estimator `k / Σ ln(X_(i)/X_(k+1))` over the `k` largest values.
pub fn hill_tail_index(values: &[f64], k: usize) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| *x > 0.0).collect();
    if k == 0 || v.len() <= k {
        return f64::NAN;
    }
    v.sort_by(|a, b| b.total_cmp(a));
    let base = v[k].ln();
    let spread: f64 = v[..k].iter().map(|x| x.ln() - base).sum();
    if spread > 0.0 {
        k as f64 / spread
    } else {
        f64::INFINITY
    }
}

pub fn n_tau_moment(
    model: &ArrivalModel,
    tau: &RandomHorizon,
    p: f64,
    n_replicates: u64,
    seed: u64,
) -> Result<NTauMoment> {
    if !(p >= 1.0) {
        return Err(Error::param("p must be at least 1"));
    }
    model.validate()?;
    tau.validate()?;
    let tau_moment = tau.moment(p);
    if let (Some(rate), RandomHorizon::Deterministic { t }) = (model.poisson_rate(), tau) {
        return Ok(NTauMoment {
            estimate: McEstimate::exact(poisson_moment(rate * t, p)),
            tau_moment,
            checkpoints: Vec::new(),
            growth_slope: 0.0,
            tail_index: f64::INFINITY,
            diverging: false,
        });
    }
    let out = par_fold(n_replicates, |range| {
        let mut acc = MomentAccumulator::default();
        let mut values = Vec::new();
        let mut error = None;
        for i in range {
            let mut rng = path_rng(seed, i);
            let horizon = tau.sample(&mut rng);
            match count_arrivals(model, horizon, &mut rng) {
                Ok(n) => {
                    let v = (n as f64).powf(p);
                    acc.push(v);
                    values.push(v);
                }
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        Fallible {
            acc: ChunkSums {
                accs: vec![acc],
                values,
            },
            error,
        }
    });
    let ChunkSums { accs: chunks, values } = out.into_result()?;
    let mut checkpoints = Vec::new();
    let mut running = MomentAccumulator::default();
    let mut next_mark = 1usize;
    for (k, c) in chunks.iter().enumerate() {
        running = running.merge(*c);
        if k + 1 == next_mark || k + 1 == chunks.len() {
            checkpoints.push((running.count(), running.mean()));
            next_mark *= 2;
        }
    }
    let growth_slope = log_log_slope(&checkpoints);
    let tail_index = if n_replicates >= MIN_HILL_REPLICATES {
        hill_tail_index(&values, (n_replicates as f64).sqrt().ceil() as usize)
    } else {
        f64::NAN
    };
    Ok(NTauMoment {
        estimate: running.estimate(),
        tau_moment,
        checkpoints,
        growth_slope,
        tail_index,
        diverging: tail_index < 1.0,
    })
}

fn log_log_slope(points: &[(u64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|&(n, m)| ((n as f64).ln(), m.ln()))
        .collect();
    if pts.len() < 3 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `P(N(τ) > x) / Ḡ(x)` at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRatioCell {
    pub x: f64,
    pub probability: RuinEstimate,
    pub ratio: f64,
    /// Computed from a closed form rather than simulation.
    pub analytic: bool,
    pub conclusive: bool,
}

pub fn n_tau_tail_ratio(
    model: &ArrivalModel,
    tau: &RandomHorizon,
    claim_tail: &TailModel,
    x_grid: &[f64],
    n_replicates: u64,
    seed: u64,
) -> Result<Vec<TailRatioCell>> {
    model.validate()?;
    tau.validate()?;
    if let Some(v) = tau.tail_violation(claim_tail) {
        return Err(Error::Hypothesis(v));
    }
    let analytic = |x: f64| -> Option<f64> {
        let rate = model.poisson_rate()?;
        let k = x.floor().max(0.0) as u64;
        match *tau {
            RandomHorizon::Deterministic { t } => Some(poisson_sf(rate * t, k)),
            // N(τ) is geometric: P(N(τ) >= j) = (λ/(λ+μ))^j.
            RandomHorizon::Exponential { rate: mu } => Some((rate / (rate + mu)).powf(k as f64 + 1.0)),
            RandomHorizon::Pareto { .. } => None,
        }
    };
    if x_grid.iter().all(|&x| analytic(x).is_some()) {
        return Ok(x_grid
            .iter()
            .map(|&x| {
                let p = analytic(x).expect("checked above");
                let probability = RuinEstimate {
                    p_hat: p,
                    n_paths: 0,
                    stderr: 0.0,
                    ci95: (p, p),
                    events: 0,
                    estimator: Estimator::Crude,
                };
                TailRatioCell {
                    x,
                    probability,
                    ratio: p / claim_tail.tail(x),
                    analytic: true,
                    conclusive: true,
                }
            })
            .collect());
    }
    let out = par_fold(n_replicates, |range| {
        let mut counts = vec![HitCounter::default(); x_grid.len()];
        let mut error = None;
        for i in range {
            let mut rng = path_rng(seed, i);
            let horizon = tau.sample(&mut rng);
            match count_arrivals(model, horizon, &mut rng) {
                Ok(n) => {
                    for (c, &x) in counts.iter_mut().zip(x_grid) {
                        c.hits += (n as f64 > x) as u64;
                        c.n += 1;
                    }
                }
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        Fallible { acc: counts, error }
    });
    Ok(out
        .into_result()?
        .into_iter()
        .zip(x_grid)
        .map(|(c, &x)| {
            let probability = RuinEstimate::from_hits(c.hits, c.n);
            TailRatioCell {
                x,
                probability,
                ratio: probability.p_hat / claim_tail.tail(x),
                analytic: false,
                conclusive: probability.is_conclusive(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn weibull_negative() -> ArrivalModel {
        ArrivalModel::new(
            TailModel::weibull(0.5, 1.0).unwrap(),
            DependenceSpec::FgmSparsePairs {
                theta: -0.5,
                max_pairs: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn poisson_shortcuts() {
        let m = ArrivalModel::poisson(2.0).unwrap();
        assert_eq!(renewal_function_mc(&m, 5.0, 10, 1).unwrap().mean, 10.0);
        let one = ArrivalModel::poisson(1.0).unwrap();
        assert_relative_eq!(moment_q_ratio(&one, 1.0, 37.0, 10, 1).unwrap().mean, 1.0, max_relative = 1e-12);
        assert_relative_eq!(moment_q_ratio(&one, 2.0, 1000.0, 10, 1).unwrap().mean, 1.001, max_relative = 1e-12);
    }

    #[test]
    fn poisson_tail_sum_matches_closed_forms() {
        // P(Poi(λ) > 0) = 1 − e^{−λ}; P(Poi(λ) > 1) = 1 − e^{−λ}(1+λ)
        assert_relative_eq!(poisson_sf(3.0, 0), 1.0 - (-3f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(poisson_sf(3.0, 1), 1.0 - 4.0 * (-3f64).exp(), max_relative = 1e-14);
        // Deep tail: leading term dominates.
        let deep = poisson_sf(10.0, 200);
        let lead = poisson_ln_pmf(10.0, 201).exp();
        assert!(deep > lead && deep < 1.1 * lead);
    }

    #[test]
    fn path_counting_consistency() {
        let path = simulate_arrivals(&weibull_negative(), 50.0, 9).unwrap();
        assert!(path.arrival_times.windows(2).all(|w| w[1] > w[0]));
        for (k, &s) in path.arrival_times.iter().enumerate() {
            assert_eq!(path.count_at(s), k as u64 + 1);
        }
        assert_eq!(path.count_at(0.0), 0);
        let mut rng = path_rng(9, 0);
        assert_eq!(count_arrivals(&weibull_negative(), 50.0, &mut rng).unwrap(), path.count_at(50.0));
    }

    #[test]
    fn tiny_horizon_gives_empty_path() {
        let m = ArrivalModel::poisson(1.0).unwrap();
        let p = simulate_arrivals(&m, 1e-12, 3).unwrap();
        assert!(p.arrival_times.is_empty());
        assert_eq!(p.count_at(1e-12), 0);
        assert!(simulate_arrivals(&m, 0.0, 3).is_err());
    }

    #[test]
    fn elementary_renewal_weibull_negative_fgm() {
        let est = renewal_function_mc(&weibull_negative(), 100.0, 10_000, 5).unwrap();
        let r = est.mean / 50.0;
        assert!((0.95..=1.05).contains(&r), "{r}");
    }

    #[test]
    fn truncated_moment_edge_cases() {
        let m = ArrivalModel::poisson(1.0).unwrap();
        let none = truncated_exp_moment(&m, 0.05, 1e3, 20.0, 2000, 1).unwrap();
        assert_eq!(none.estimate.mean, 0.0);
        // r = 0 gives P(N(t) > k) = P(Poi(t) > k)
        let p = truncated_exp_moment(&m, 0.0, 0.5, 20.0, 200_000, 2).unwrap();
        let exact = poisson_sf(20.0, 30);
        assert!((p.estimate.mean - exact).abs() < 4.0 * p.estimate.stderr, "{p:?} vs {exact}");
    }

    #[test]
    fn horizon_negligibility() {
        let pareto = TailModel::pareto(2.5, 1.0).unwrap();
        assert!(RandomHorizon::Deterministic { t: 10.0 }.negligible_vs(&pareto));
        assert!(RandomHorizon::Exponential { rate: 0.1 }.negligible_vs(&pareto));
        assert!(RandomHorizon::Pareto { alpha: 3.0, xm: 1.0 }.negligible_vs(&pareto));
        assert!(!RandomHorizon::Pareto { alpha: 1.5, xm: 1.0 }.negligible_vs(&pareto));
        let exp = TailModel::exponential(1.0).unwrap();
        assert!(!RandomHorizon::Exponential { rate: 0.5 }.negligible_vs(&exp));
    }

    #[test]
    fn n_tau_poisson_cases() {
        let m = ArrivalModel::poisson(1.0).unwrap();
        let det = n_tau_moment(&m, &RandomHorizon::Deterministic { t: 10.0 }, 1.0, 100, 1).unwrap();
        assert_relative_eq!(det.estimate.mean, 10.0, max_relative = 1e-12);
        let exp = n_tau_moment(&m, &RandomHorizon::Exponential { rate: 1.0 }, 1.0, 100_000, 1).unwrap();
        assert!((exp.estimate.mean - 1.0).abs() < 4.0 * exp.estimate.stderr, "{:?}", exp.estimate);
    }

    #[test]
    fn hill_recovers_pareto_quantiles() {
        let n = 100_000;
        let q: Vec<f64> = (1..=n).map(|i| (i as f64 / (n + 1) as f64).powf(-1.0 / 0.75)).collect();
        assert_relative_eq!(hill_tail_index(&q, 316), 0.75, max_relative = 0.02);
        assert_eq!(hill_tail_index(&[3.0; 50], 10), f64::INFINITY);
        assert!(hill_tail_index(&[1.0, 2.0], 5).is_nan());
    }

    #[test]
    fn n_tau_divergence_tracks_the_horizon_moment() {
        // E N²(τ) < ∞ iff E τ² < ∞, i.e. α > 2 for Pareto(α) horizons
        let m = ArrivalModel::poisson(1.0).unwrap();
        for seed in 1..4 {
            for (alpha, diverging) in [(1.5, true), (2.5, false)] {
                let tau = RandomHorizon::Pareto { alpha, xm: 1.0 };
                let r = n_tau_moment(&m, &tau, 2.0, 10_000, seed).unwrap();
                assert_eq!(r.diverging, diverging, "α = {alpha}, seed {seed}: {}", r.tail_index);
                assert_eq!(r.tau_moment.is_finite(), !diverging);
            }
        }
        let few = n_tau_moment(&m, &RandomHorizon::Pareto { alpha: 1.5, xm: 1.0 }, 2.0, 100, 1).unwrap();
        assert!(few.tail_index.is_nan() && !few.diverging);
    }

    #[test]
    fn n_tau_tail_ratio_decreases() {
        let m = ArrivalModel::poisson(1.0).unwrap();
        let claims = TailModel::pareto(2.5, 1.0).unwrap();
        for tau in [RandomHorizon::Deterministic { t: 10.0 }, RandomHorizon::Exponential { rate: 1.0 }] {
            let cells = n_tau_tail_ratio(&m, &tau, &claims, &[50.0, 100.0, 200.0], 0, 0).unwrap();
            assert!(cells.windows(2).all(|w| w[1].ratio < w[0].ratio), "{cells:?}");
        }
        let heavy = RandomHorizon::Pareto { alpha: 1.5, xm: 1.0 };
        assert!(matches!(
            n_tau_tail_ratio(&m, &heavy, &claims, &[50.0], 10, 0),
            Err(Error::Hypothesis(HypothesisViolation::HorizonTail { .. }))
        ));
    }

    proptest! {
        #[test]
        fn count_at_is_monotone(seed in any::<u64>(), a in 0.0f64..30.0, b in 0.0f64..30.0) {
            let path = simulate_arrivals(&weibull_negative(), 30.0, seed).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(path.count_at(lo) <= path.count_at(hi));
        }
    }
}
