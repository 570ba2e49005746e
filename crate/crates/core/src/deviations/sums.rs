//! Tails of (weighted) sums of dependent claims.

use serde::Serialize;

use crate::dependence::{fgm_conditional_cdf, DependentUniforms, GrowthClass, Side};
use crate::error::{Error, HypothesisViolation, Result};
use crate::estimate::{Estimator, HitCounter, MomentAccumulator, RuinEstimate};
use crate::ruin::ClaimModel;
use crate::stream::{derive_seed, par_fold, path_rng};
use crate::tails::{log_grid, TailModel};

/// Most summands accepted by [`weighted_sum_tail_ratio`].
pub const MAX_WEIGHTED_TERMS: usize = 8;

/// Grid points per `n` in the large-deviation scans.
pub const LD_GRID_POINTS: usize = 8;

/// `P(Σ c_k Y_k > x)` for each `x`, from common paths.
///
/// The conditional estimator splits on which weighted term `c_j Y_j` is the
/// largest; given the other claims that event together with exceedance is
/// `Y_j > max(M_{−j}, x − S_{−j})/c_j`.
pub fn weighted_sum_curve(
    claims: &ClaimModel,
    weights: &[f64],
    xs: &[f64],
    n_paths: u64,
    seed: u64,
    estimator: Estimator,
) -> Result<Vec<RuinEstimate>> {
    claims.marginal.validate()?;
    claims.dependence.validate()?;
    if weights.is_empty() || weights.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::param("weights must be positive and finite"));
    }
    if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Grid("thresholds must be finite".into()));
    }
    if n_paths == 0 {
        return Err(Error::pre("n_paths must be positive"));
    }
    let g = claims.marginal;
    let theta = claims.dependence.theta();
    let n = weights.len();
    match estimator {
        Estimator::Crude => {
            let counts = par_fold(n_paths, |range| {
                let mut acc = vec![HitCounter::default(); xs.len()];
                for i in range {
                    let mut rng = path_rng(seed, i);
                    let mut gen = DependentUniforms::new(claims.dependence);
                    let sum: f64 = weights.iter().map(|c| c * g.tail_quantile(gen.next(&mut rng).survival)).sum();
                    for (a, &x) in acc.iter_mut().zip(xs) {
                        a.hits += (sum > x) as u64;
                        a.n += 1;
                    }
                }
                acc
            });
            Ok(counts.iter().map(|c| RuinEstimate::from_hits(c.hits, c.n)).collect())
        }
        Estimator::Conditional => {
            let moments = par_fold(n_paths, |range| {
                let mut acc = vec![MomentAccumulator::default(); xs.len()];
                let mut terms = vec![0.0; n];
                let mut partners = vec![f64::NAN; n];
                let mut out = vec![0.0; xs.len()];
                for i in range {
                    let mut rng = path_rng(seed, i);
                    let mut gen = DependentUniforms::new(claims.dependence);
                    for k in 0..n {
                        let d = gen.next(&mut rng);
                        terms[k] = weights[k] * g.tail_quantile(d.survival);
                        partners[k] = d.partner.unwrap_or(f64::NAN);
                    }
                    conditional_sum_terms(&g, theta, weights, &terms, &partners, xs, &mut out);
                    for (a, &v) in acc.iter_mut().zip(&out) {
                        a.push(v);
                    }
                }
                acc
            });
            Ok(moments
                .iter()
                .map(|m| RuinEstimate::from_moments(m, Estimator::Conditional))
                .collect())
        }
    }
}

fn conditional_sum_terms(
    g: &TailModel,
    theta: f64,
    weights: &[f64],
    terms: &[f64],
    partners: &[f64],
    xs: &[f64],
    out: &mut [f64],
) {
    let total: f64 = terms.iter().sum();
    let (mut top, mut second, mut top_idx) = (f64::NEG_INFINITY, f64::NEG_INFINITY, usize::MAX);
    for (k, &v) in terms.iter().enumerate() {
        if v > top {
            second = top;
            top = v;
            top_idx = k;
        } else if v > second {
            second = v;
        }
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..terms.len() {
        let others = if j == top_idx { second } else { top };
        let rest = total - terms[j];
        for (acc, &x) in out.iter_mut().zip(xs) {
            let w = others.max(x - rest) / weights[j];
            let s = g.tail(w);
            *acc += if partners[j].is_nan() {
                s
            } else {
                fgm_conditional_cdf(theta, s, partners[j])
            };
        }
    }
}

/// Crude estimate of `P(S_n > x)`, `S_n = Y_1 + ... + Y_n`.
pub fn partial_sum_tail_mc(claims: &ClaimModel, n: usize, x: f64, n_paths: u64, seed: u64) -> Result<RuinEstimate> {
    if n == 0 {
        return Err(Error::pre("n must be at least 1"));
    }
    Ok(weighted_sum_curve(claims, &vec![1.0; n], &[x], n_paths, seed, Estimator::Crude)?[0])
}

/// Conditional estimate of `P(S_n > x)`.
pub fn partial_sum_tail_conditional(
    claims: &ClaimModel,
    n: usize,
    x: f64,
    n_paths: u64,
    seed: u64,
) -> Result<RuinEstimate> {
    if n == 0 {
        return Err(Error::pre("n must be at least 1"));
    }
    Ok(weighted_sum_curve(claims, &vec![1.0; n], &[x], n_paths, seed, Estimator::Conditional)?[0])
}

/// One `(n, x)` cell of a large-deviation scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationCell {
    pub n: usize,
    pub x: f64,
    pub probability: RuinEstimate,
    pub comparator: f64,
    pub ratio: f64,
    pub conclusive: bool,
}

/// Cells over `x ∈ [γn, 10γn]` for each `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationGrid {
    pub gamma: f64,
    pub cells: Vec<DeviationCell>,
}

impl DeviationGrid {
    fn by_n(&self) -> Vec<(usize, Vec<&DeviationCell>)> {
        let mut out: Vec<(usize, Vec<&DeviationCell>)> = Vec::new();
        for c in &self.cells {
            match out.last_mut() {
                Some((n, v)) if *n == c.n => v.push(c),
                _ => out.push((c.n, vec![c])),
            }
        }
        out
    }

    /// `max |ratio − 1|` over conclusive cells, per `n`.
    pub fn max_deviation_by_n(&self) -> Vec<(usize, Option<f64>)> {
        self.by_n()
            .into_iter()
            .map(|(n, cells)| {
                let dev = cells
                    .iter()
                    .filter(|c| c.conclusive)
                    .map(|c| (c.ratio - 1.0).abs())
                    .reduce(f64::max);
                (n, dev)
            })
            .collect()
    }

    /// `(n, inf ratio, sup ratio)` over conclusive cells.
    pub fn ratio_range_by_n(&self) -> Vec<(usize, Option<(f64, f64)>)> {
        self.by_n()
            .into_iter()
            .map(|(n, cells)| {
                let r: Vec<f64> = cells.iter().filter(|c| c.conclusive).map(|c| c.ratio).collect();
                let range = (!r.is_empty()).then(|| {
                    (
                        r.iter().copied().fold(f64::INFINITY, f64::min),
                        r.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    )
                });
                (n, range)
            })
            .collect()
    }

    pub fn inconclusive(&self) -> usize {
        self.cells.iter().filter(|c| !c.conclusive).count()
    }
}

fn deviation_grid(
    claims: &ClaimModel,
    gamma: f64,
    n_grid: &[usize],
    n_paths: u64,
    seed: u64,
    comparator: impl Fn(usize, f64) -> f64,
) -> Result<DeviationGrid> {
    let mu = claims.marginal.finite_mean()?;
    if !(gamma > mu) {
        return Err(Error::param(format!("gamma = {gamma} must exceed the claim mean {mu}")));
    }
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::Grid("n grid must be nonempty and positive".into()));
    }
    let mut cells = Vec::new();
    for &n in n_grid {
        let gn = gamma * n as f64;
        let xs = log_grid(gn, 10.0 * gn, LD_GRID_POINTS);
        let est = weighted_sum_curve(
            claims,
            &vec![1.0; n],
            &xs,
            n_paths,
            derive_seed(seed, n as u64),
            Estimator::Conditional,
        )?;
        for (x, p) in xs.into_iter().zip(est) {
            let c = comparator(n, x);
            cells.push(DeviationCell {
                n,
                x,
                probability: p,
                comparator: c,
                ratio: p.p_hat / c,
                conclusive: p.is_conclusive(),
            });
        }
    }
    Ok(DeviationGrid { gamma, cells })
}

/// `P(S_n > x)/(n·Ḡ(x − μ_G n))` over `x ∈ [γn, 10γn]`; claims must be ENOD.
pub fn ld_ratio_enod(claims: &ClaimModel, gamma: f64, n_grid: &[usize], n_paths: u64, seed: u64) -> Result<DeviationGrid> {
    let growth = claims.dependence.growth(Side::Upper);
    if !matches!(growth, GrowthClass::Bounded { .. }) {
        return Err(Error::Hypothesis(HypothesisViolation::ClaimCoefficientBounded {
            growth: growth.to_string(),
        }));
    }
    let g = claims.marginal;
    let mu = g.finite_mean()?;
    deviation_grid(claims, gamma, n_grid, n_paths, seed, |n, x| n as f64 * g.tail(x - mu * n as f64))
}

/// Bounds on `P(S_n > x)/(n·Ḡ(x))` for WUOD claims with `g_U(n) = O(n^d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdBoundsReport {
    pub d: f64,
    pub r: f64,
    /// `(r − 1)/(J⁺ + d − 1)`.
    pub v: f64,
    /// `Ḡ^*(v)/Ḡ_*((1 − μ_G/γ)^{-1})`.
    pub upper_target: f64,
    pub lower_target: f64,
    /// Whether `g_U(n) = o(n^(r−1))`, under which the lower bound holds.
    pub lower_bound_applies: bool,
    /// Sup and inf of the ratio over the largest `n` in the grid.
    pub observed_sup: Option<f64>,
    pub observed_inf: Option<f64>,
    pub grid: DeviationGrid,
}

/// Pareto upper target `(1/(v(1 − μ/γ)))^α`.
pub fn ld_upper_target(alpha: f64, mu: f64, gamma: f64, r: f64, d: f64) -> f64 {
    let v = (r - 1.0) / (alpha + d - 1.0);
    // Ḡ^*(y) = Ḡ_*(y) = y^(−α)
    v.powf(-alpha) * (1.0 - mu / gamma).powf(-alpha)
}

/// Exponent `d` read off the claim coefficient growth: 0 when bounded.
pub fn growth_exponent(growth: &GrowthClass) -> Option<f64> {
    match *growth {
        GrowthClass::Bounded { .. } => Some(0.0),
        GrowthClass::Polynomial { exponent } => Some(exponent),
        GrowthClass::Exponential => None,
    }
}

pub fn ld_bounds_wuod(
    claims: &ClaimModel,
    gamma: f64,
    r: f64,
    n_grid: &[usize],
    n_paths: u64,
    seed: u64,
) -> Result<LdBoundsReport> {
    let (alpha, g) = match claims.marginal {
        TailModel::Pareto { alpha, .. } => (alpha, claims.marginal),
        other => {
            return Err(Error::Unsupported(format!(
                "analytic bounds need Pareto star functions; got {other}"
            )))
        }
    };
    if !(r > 1.0 && r < alpha) {
        return Err(Error::param(format!("r = {r} must lie in (1, {alpha})")));
    }
    let growth = claims.dependence.growth(Side::Upper);
    let d = growth_exponent(&growth).ok_or_else(|| {
        Error::Hypothesis(HypothesisViolation::ClaimCoefficientGrowth {
            growth: growth.to_string(),
            moment_index: alpha,
        })
    })?;
    let mu = g.finite_mean()?;
    let grid = deviation_grid(claims, gamma, n_grid, n_paths, seed, |n, x| n as f64 * g.tail(x))?;
    let last = grid.ratio_range_by_n().last().and_then(|(_, r)| *r);
    Ok(LdBoundsReport {
        d,
        r,
        v: (r - 1.0) / (alpha + d - 1.0),
        upper_target: ld_upper_target(alpha, mu, gamma, r, d),
        lower_target: 1.0,
        lower_bound_applies: growth.is_little_o_of_power(r - 1.0),
        observed_sup: last.map(|(_, hi)| hi),
        observed_inf: last.map(|(lo, _)| lo),
        grid,
    })
}

/// `P(Σ c_k Y_k > x)` against `Σ Ḡ(x/c_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedSumRatio {
    pub probability: RuinEstimate,
    pub comparator: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub conclusive: bool,
}

pub fn weighted_sum_tail_ratio(
    claims: &ClaimModel,
    coefficients: &[f64],
    x: f64,
    n_paths: u64,
    seed: u64,
) -> Result<WeightedSumRatio> {
    if coefficients.is_empty() || coefficients.len() > MAX_WEIGHTED_TERMS {
        return Err(Error::pre(format!("need 1 to {MAX_WEIGHTED_TERMS} coefficients")));
    }
    let g = claims.marginal;
    if !g.indices().in_class_d() {
        return Err(Error::Hypothesis(HypothesisViolation::ClaimClass { claims: g.to_string() }));
    }
    let p = weighted_sum_curve(claims, coefficients, &[x], n_paths, seed, Estimator::Conditional)?[0];
    let comparator: f64 = coefficients.iter().map(|c| g.tail(x / c)).sum();
    Ok(WeightedSumRatio {
        probability: p,
        comparator,
        ratio: p.p_hat / comparator,
        ratio_stderr: p.stderr / comparator,
        conclusive: p.is_conclusive(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::DependenceSpec;
    use crate::quad::{integrate_pieces, Tolerance};
    use crate::tails::convolution_tail;
    use approx::assert_relative_eq;

    fn pareto(dependence: DependenceSpec) -> ClaimModel {
        ClaimModel {
            marginal: TailModel::pareto(2.5, 1.0).unwrap(),
            dependence,
        }
    }

    /// `P(Y_1 + Y_2 > x)` for an FGM pair: the independent convolution plus
    /// `θ∫ g(y)(1 − 2G(y))·(−G(x−y)Ḡ(x−y)) dy`.
    fn fgm_pair_oracle(model: &TailModel, theta: f64, x: f64) -> f64 {
        let lo = model.support_min();
        let correction = integrate_pieces(
            |y| {
                let z = x - y;
                model.density(y) * (1.0 - 2.0 * model.cdf(y)) * -(model.cdf(z) * model.tail(z))
            },
            &[lo, x / 2.0, x - lo],
            Tolerance::new(1e-14, 1e-10),
        )
        .unwrap();
        convolution_tail(model, x).unwrap() + theta * correction
    }

    #[test]
    fn single_summand_matches_tail() {
        let c = pareto(DependenceSpec::Independent);
        let est = partial_sum_tail_mc(&c, 1, 3.0, 200_000, 1).unwrap();
        let exact = c.marginal.tail(3.0);
        assert!((est.p_hat - exact).abs() < 3.0 * est.stderr);
        let cond = partial_sum_tail_conditional(&c, 1, 3.0, 100, 1).unwrap();
        assert_relative_eq!(cond.p_hat, exact, max_relative = 1e-14);
        // Raw-moment variance leaves a rounding floor near sqrt(eps)·p/sqrt(n).
        assert!(cond.stderr < 1e-8 * exact);
    }

    #[test]
    fn pair_sums_match_quadrature_oracles() {
        let x = 20.0;
        let indep = pareto(DependenceSpec::Independent);
        let oracle = convolution_tail(&indep.marginal, x).unwrap();
        let est = partial_sum_tail_mc(&indep, 2, x, 1_000_000, 2).unwrap();
        assert!((est.p_hat - oracle).abs() < 3.0 * est.stderr, "{est:?} vs {oracle}");
        let coupled = pareto(DependenceSpec::FgmAllAdjacentPairs { theta: 0.5 });
        let oracle = fgm_pair_oracle(&coupled.marginal, 0.5, x);
        let est = partial_sum_tail_mc(&coupled, 2, x, 1_000_000, 3).unwrap();
        assert!((est.p_hat - oracle).abs() < 3.0 * est.stderr, "{est:?} vs {oracle}");
        let cond = partial_sum_tail_conditional(&coupled, 2, x, 100_000, 4).unwrap();
        assert!((cond.p_hat - oracle).abs() < 3.0 * cond.stderr, "{cond:?} vs {oracle}");
    }

    #[test]
    fn fgm_oracle_independent_route() {
        // θ = 0 reduces to the convolution; a coarse double integral of the
        // copula density agrees with the one-dimensional correction.
        let g = TailModel::pareto(2.5, 1.0).unwrap();
        assert_relative_eq!(fgm_pair_oracle(&g, 0.0, 20.0), convolution_tail(&g, 20.0).unwrap());
        let theta = 0.5;
        let x = 6.0;
        let direct = integrate_pieces(
            |y1| {
                let inner = integrate_pieces(
                    |y2| {
                        g.density(y2) * (1.0 + theta * (1.0 - 2.0 * g.cdf(y1)) * (1.0 - 2.0 * g.cdf(y2)))
                    },
                    &[(x - y1).max(1.0), 1e3, 1e6],
                    Tolerance::new(1e-13, 1e-9),
                )
                .unwrap();
                g.density(y1) * inner
            },
            &[1.0, 5.0, 1e3, 1e6],
            Tolerance::new(1e-12, 1e-8),
        )
        .unwrap();
        assert_relative_eq!(direct, fgm_pair_oracle(&g, theta, x), max_relative = 1e-5);
    }

    #[test]
    fn weighted_sum_against_convolution() {
        let c = pareto(DependenceSpec::Independent);
        let w = weighted_sum_tail_ratio(&c, &[1.0, 1.0], 40.0, 100_000, 5).unwrap();
        let oracle = convolution_tail(&c.marginal, 40.0).unwrap() / (2.0 * c.marginal.tail(40.0));
        assert_relative_eq!(oracle, 1.1173, max_relative = 1e-4);
        assert!((w.ratio - oracle).abs() < 3.0 * w.ratio_stderr, "{w:?} vs {oracle}");
        let single = weighted_sum_tail_ratio(&c, &[1.7], 40.0, 1000, 5).unwrap();
        assert_relative_eq!(single.ratio, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn weighted_sum_trend_and_scaling() {
        let c = pareto(DependenceSpec::FgmSparsePairs {
            theta: 0.5,
            max_pairs: None,
        });
        let coeffs = [0.5, 1.0, 2.0];
        let ratios: Vec<f64> = [80.0, 160.0, 320.0]
            .iter()
            .map(|&x| weighted_sum_tail_ratio(&c, &coeffs, x, 100_000, 6).unwrap().ratio)
            .collect();
        assert!(ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()), "{ratios:?}");
        let base = weighted_sum_tail_ratio(&c, &coeffs, 80.0, 100_000, 7).unwrap();
        for lambda in [0.5, 2.0] {
            let scaled: Vec<f64> = coeffs.iter().map(|c| c * lambda).collect();
            let s = weighted_sum_tail_ratio(&c, &scaled, 80.0 * lambda, 100_000, 7).unwrap();
            assert!((s.ratio - base.ratio).abs() <= 2.0 * base.ratio_stderr + 1e-12, "{s:?} vs {base:?}");
        }
    }

    #[test]
    fn ld_gates() {
        let adj = pareto(DependenceSpec::FgmSparsePairs {
            theta: 0.5,
            max_pairs: None,
        });
        assert!(matches!(
            ld_ratio_enod(&adj, 10.0 / 3.0, &[5], 1000, 0),
            Err(Error::Hypothesis(HypothesisViolation::ClaimCoefficientBounded { .. }))
        ));
        let indep = pareto(DependenceSpec::Independent);
        assert!(ld_ratio_enod(&indep, 1.5, &[5], 1000, 0).is_err());
        let weib = ClaimModel {
            marginal: TailModel::weibull(0.5, 1.0).unwrap(),
            dependence: DependenceSpec::Independent,
        };
        assert!(matches!(ld_bounds_wuod(&weib, 5.0, 2.0, &[5], 1000, 0), Err(Error::Unsupported(_))));
        assert!(ld_bounds_wuod(&indep, 10.0 / 3.0, 2.6, &[5], 1000, 0).is_err());
    }

    #[test]
    fn ld_single_claim_cells_are_exact() {
        let c = pareto(DependenceSpec::Independent);
        let grid = ld_ratio_enod(&c, 10.0 / 3.0, &[1], 100, 1).unwrap();
        for cell in &grid.cells {
            assert!(cell.x >= 10.0 / 3.0);
            let expected = c.marginal.tail(cell.x) / c.marginal.tail(cell.x - 5.0 / 3.0);
            assert_relative_eq!(cell.ratio, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn upper_target_value() {
        // v = 1/(1.5 + log2 1.5), target (2/v)^2.5.
        let d = 1.5f64.log2();
        let t = ld_upper_target(2.5, 5.0 / 3.0, 10.0 / 3.0, 2.0, d);
        assert_relative_eq!(t, (2.0 * (1.5 + d)).powf(2.5), max_relative = 1e-14);
        assert_relative_eq!(t, 35.507_542, max_relative = 1e-7);
    }
}
