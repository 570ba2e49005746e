//! Dependent sequences with known dominating coefficients.
//!
//! Coupled coordinates are drawn in pairs from the FGM copula
//! `C(u,v) = uv(1 + θ(1−u)(1−v))`. Every other coordinate is independent, so
//! the best orthant constants are products of per-pair factors.
//!
//! Sequences are produced on the survival scale: `S_i` is uniform and the
//! variate is `tail_quantile(S_i)`. FGM is radially symmetric, so the
//! survival copula of the variates is the same FGM copula.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{HitCounter, MomentAccumulator};
use crate::quad::{self, Tolerance};
use crate::stream::{par_fold, path_rng, uniform, Merge};
use crate::tails::TailModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DependenceSpec {
    Independent,
    /// Couples `(2^k, 2^k + 1)` for `k = 1, 2, ...`, optionally only for
    /// `k <= max_pairs`.
    FgmSparsePairs {
        theta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_pairs: Option<u32>,
    },
    /// Couples `(1,2), (3,4), ...`.
    FgmAllAdjacentPairs { theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `P(∩{ξᵢ > xᵢ}) <= g_U(n) ∏ P(ξᵢ > xᵢ)`.
    Upper,
    /// `P(∩{ξᵢ <= xᵢ}) <= g_L(n) ∏ P(ξᵢ <= xᵢ)`.
    Lower,
}

impl Side {
    pub fn flipped(self) -> Self {
        match self {
            Side::Upper => Side::Lower,
            Side::Lower => Side::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GrowthClass {
    Bounded { bound: f64 },
    /// `g(n) = O(n^exponent)`.
    Polynomial { exponent: f64 },
    Exponential,
}

impl GrowthClass {
    /// `g(n) = o(n^b)` for some finite `b > 0`.
    pub fn is_at_most_polynomial(&self) -> bool {
        !matches!(self, GrowthClass::Exponential)
    }

    /// `g(n) = o(n^e)`. A polynomial exponent equal to `e` does not qualify.
    pub fn is_little_o_of_power(&self, e: f64) -> bool {
        match *self {
            GrowthClass::Bounded { .. } => e > 0.0,
            GrowthClass::Polynomial { exponent } => exponent < e,
            GrowthClass::Exponential => false,
        }
    }
}

impl fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthClass::Bounded { bound } => write!(f, "bounded by {bound}"),
            GrowthClass::Polynomial { exponent } => write!(f, "polynomially as n^{exponent:.6}"),
            GrowthClass::Exponential => f.write_str("exponentially"),
        }
    }
}

/// `g(1..=n_max)` together with its growth class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominatingCoefficientProfile {
    pub values: Vec<f64>,
    pub growth: GrowthClass,
}

/// Position of an index within the coupling pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRole {
    Single,
    /// First member; the partner is the next index.
    First,
    /// Second member; the partner is the previous index.
    Second,
}

impl DependenceSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DependenceSpec::Independent => Ok(()),
            DependenceSpec::FgmSparsePairs { theta, .. } | DependenceSpec::FgmAllAdjacentPairs { theta } => {
                if (-1.0..=1.0).contains(&theta) {
                    Ok(())
                } else {
                    Err(Error::param(format!("FGM theta must lie in [-1, 1], got {theta}")))
                }
            }
        }
    }

    pub fn theta(&self) -> f64 {
        match *self {
            DependenceSpec::Independent => 0.0,
            DependenceSpec::FgmSparsePairs { theta, .. } | DependenceSpec::FgmAllAdjacentPairs { theta } => theta,
        }
    }

    /// Role of the 1-based index `i`.
    pub fn role(&self, i: u64) -> PairRole {
        match *self {
            DependenceSpec::Independent => PairRole::Single,
            DependenceSpec::FgmAllAdjacentPairs { .. } => {
                if i % 2 == 1 {
                    PairRole::First
                } else {
                    PairRole::Second
                }
            }
            DependenceSpec::FgmSparsePairs { max_pairs, .. } => {
                let cap = max_pairs.unwrap_or(u32::MAX);
                if i >= 2 && i.is_power_of_two() && i.trailing_zeros() <= cap {
                    PairRole::First
                } else if i >= 3 && (i - 1).is_power_of_two() && (i - 1).trailing_zeros() <= cap {
                    PairRole::Second
                } else {
                    PairRole::Single
                }
            }
        }
    }

    /// Number of coupled pairs lying entirely inside `[1, n]`.
    pub fn pair_count(&self, n: u64) -> u64 {
        match *self {
            DependenceSpec::Independent => 0,
            DependenceSpec::FgmAllAdjacentPairs { .. } => n / 2,
            DependenceSpec::FgmSparsePairs { max_pairs, .. } => {
                // K(n) = #{k >= 1 : 2^k + 1 <= n}
                let k = if n >= 3 { 63 - (n - 1).leading_zeros() as u64 } else { 0 };
                max_pairs.map_or(k, |cap| k.min(cap as u64))
            }
        }
    }

    /// Analytic dominating coefficient `g_U(n)` or `g_L(n)`.
    /// Both sides share one formula for these structures.
    pub fn coefficient(&self, n: u64, _side: Side) -> f64 {
        let theta = self.theta();
        let pairs = self.pair_count(n);
        match self {
            DependenceSpec::Independent => 1.0,
            // FGM with θ <= 0 is negatively orthant dependent on both sides;
            // with θ > 0 each pair contributes at most 1 + θ on either side.
            DependenceSpec::FgmSparsePairs { .. } => {
                if theta <= 0.0 {
                    1.0
                } else {
                    (1.0 + theta).powi(pairs as i32)
                }
            }
            DependenceSpec::FgmAllAdjacentPairs { .. } => (1.0 + theta.abs()).powi(pairs as i32),
        }
    }

    pub fn growth(&self, _side: Side) -> GrowthClass {
        let theta = self.theta();
        match *self {
            DependenceSpec::Independent => GrowthClass::Bounded { bound: 1.0 },
            DependenceSpec::FgmSparsePairs { max_pairs, .. } => {
                if theta <= 0.0 {
                    GrowthClass::Bounded { bound: 1.0 }
                } else if let Some(cap) = max_pairs {
                    GrowthClass::Bounded {
                        bound: (1.0 + theta).powi(cap as i32),
                    }
                } else {
                    GrowthClass::Polynomial {
                        exponent: (1.0 + theta).log2(),
                    }
                }
            }
            DependenceSpec::FgmAllAdjacentPairs { .. } => {
                if theta == 0.0 {
                    GrowthClass::Bounded { bound: 1.0 }
                } else {
                    GrowthClass::Exponential
                }
            }
        }
    }

    pub fn profile(&self, n_max: u64, side: Side) -> DominatingCoefficientProfile {
        DominatingCoefficientProfile {
            values: (1..=n_max).map(|n| self.coefficient(n, side)).collect(),
            growth: self.growth(side),
        }
    }
}

impl fmt::Display for DependenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DependenceSpec::Independent => f.write_str("independent"),
            DependenceSpec::FgmSparsePairs { theta, max_pairs: None } => {
                write!(f, "FGM dyadic pairs (theta={theta})")
            }
            DependenceSpec::FgmSparsePairs {
                theta,
                max_pairs: Some(k),
            } => write!(f, "FGM dyadic pairs (theta={theta}, at most {k} pairs)"),
            DependenceSpec::FgmAllAdjacentPairs { theta } => write!(f, "FGM adjacent pairs (theta={theta})"),
        }
    }
}

pub fn dominating_coefficient(spec: &DependenceSpec, n: u64, side: Side) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    Ok(spec.coefficient(n, side))
}

/// Draws `v` from the FGM conditional law `C(v | u)` by inverting
/// `w = v(1 + a(1 − v))`, `a = θ(1 − 2u)`.
#[inline]
pub fn fgm_conditional(theta: f64, u: f64, w: f64) -> f64 {
    let a = theta * (1.0 - 2.0 * u);
    if a.abs() < 1e-12 {
        return w;
    }
    let b = 1.0 + a;
    2.0 * w / (b + (b * b - 4.0 * a * w).sqrt())
}

/// `P(S < s | S_partner = σ)` for a coupled survival-scale uniform.
#[inline]
pub fn fgm_conditional_cdf(theta: f64, s: f64, partner: f64) -> f64 {
    s * (1.0 + theta * (1.0 - s) * (1.0 - 2.0 * partner))
}

/// One coordinate of a dependent sequence on the survival scale.
#[derive(Debug, Clone, Copy)]
pub struct Draw {
    pub survival: f64,
    pub partner: Option<f64>,
}

/// Streaming generator of survival-scale uniforms `S_1, S_2, ...`.
///
/// Both members of a pair are drawn when its first index is reached, so the
/// random-number consumption pattern does not depend on where the caller
/// stops.
#[derive(Debug, Clone)]
pub struct DependentUniforms {
    spec: DependenceSpec,
    next_index: u64,
    pending: f64,
    first: f64,
}

impl DependentUniforms {
    pub fn new(spec: DependenceSpec) -> Self {
        Self {
            spec,
            next_index: 1,
            pending: f64::NAN,
            first: f64::NAN,
        }
    }

    /// 1-based index of the coordinate the next call returns.
    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    #[inline]
    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Draw {
        let i = self.next_index;
        self.next_index += 1;
        match self.spec.role(i) {
            PairRole::Single => Draw {
                survival: uniform(rng),
                partner: None,
            },
            PairRole::First => {
                let u = uniform(rng);
                let w = uniform(rng);
                self.first = u;
                self.pending = fgm_conditional(self.spec.theta(), u, w);
                Draw {
                    survival: u,
                    partner: Some(self.pending),
                }
            }
            PairRole::Second => Draw {
                survival: self.pending,
                partner: Some(self.first),
            },
        }
    }
}

/// `n` variates with the given marginal and dependence, from stream 0 of
/// `seed`.
pub fn generate_sequence(spec: &DependenceSpec, marginal: &TailModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    spec.validate()?;
    let mut rng = path_rng(seed, 0);
    Ok(fill_sequence(spec, marginal, n, &mut rng))
}

fn fill_sequence<R: Rng + ?Sized>(spec: &DependenceSpec, marginal: &TailModel, n: usize, rng: &mut R) -> Vec<f64> {
    let mut gen = DependentUniforms::new(*spec);
    (0..n).map(|_| marginal.tail_quantile(gen.next(rng).survival)).collect()
}

/// Monte Carlo comparison of a joint orthant probability with its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub side: Side,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub coefficient: f64,
    /// `∏` of the marginal probabilities, the independent value.
    pub product: f64,
    pub mc_stderr: f64,
    pub events: u64,
    /// `lhs <= rhs + 3·stderr`.
    pub satisfied: bool,
    /// `|lhs − product| <= 3·stderr`.
    pub matches_product: bool,
    /// At least 100 joint events.
    pub conclusive: bool,
}

fn inequality_report(side: Side, n: usize, coefficient: f64, product: f64, counts: HitCounter) -> InequalityReport {
    let p = counts.hits as f64 / counts.n as f64;
    let se = (p * (1.0 - p) / counts.n as f64).sqrt();
    let rhs = coefficient * product;
    InequalityReport {
        side,
        n,
        lhs: p,
        rhs,
        coefficient,
        product,
        mc_stderr: se,
        events: counts.hits,
        satisfied: p <= rhs + 3.0 * se,
        matches_product: (p - product).abs() <= 3.0 * se,
        conclusive: counts.hits >= 100,
    }
}

fn count_events<F>(spec: &DependenceSpec, marginal: &TailModel, n: usize, n_paths: u64, seed: u64, event: F) -> HitCounter
where
    F: Fn(&[f64]) -> bool + Sync,
{
    par_fold(n_paths, |range| {
        let mut acc = HitCounter::default();
        for i in range {
            let ys = fill_sequence(spec, marginal, n, &mut path_rng(seed, i));
            acc.hits += event(&ys) as u64;
            acc.n += 1;
        }
        acc
    })
}

fn check_dimension(n: usize, max: usize) -> Result<()> {
    if n < 1 || n > max {
        return Err(Error::pre(format!("dimension {n} outside the supported range [1, {max}]")));
    }
    Ok(())
}

/// Estimates `P(∩{Yᵢ > xᵢ})` (upper) or `P(∩{Yᵢ <= xᵢ})` (lower) and compares
/// it with `g(n)` times the product of the marginal probabilities.
pub fn verify_orthant_inequality(
    spec: &DependenceSpec,
    marginal: &TailModel,
    thresholds: &[f64],
    side: Side,
    n_paths: u64,
    seed: u64,
) -> Result<InequalityReport> {
    if thresholds.len() < 2 || thresholds.len() > 8 {
        return Err(Error::pre("between 2 and 8 thresholds are required"));
    }
    spec.validate()?;
    let n = thresholds.len();
    let product: f64 = thresholds
        .iter()
        .map(|&x| match side {
            Side::Upper => marginal.tail(x),
            Side::Lower => marginal.cdf(x),
        })
        .product();
    let counts = count_events(spec, marginal, n, n_paths, seed, |ys| match side {
        Side::Upper => ys.iter().zip(thresholds).all(|(y, x)| y > x),
        Side::Lower => ys.iter().zip(thresholds).all(|(y, x)| y <= x),
    });
    Ok(inequality_report(side, n, spec.coefficient(n as u64, side), product, counts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductMomentReport {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub coefficient: f64,
    pub mc_stderr: f64,
    /// Cap applied to each variate when the marginal has no finite second
    /// moment; `min(Y, cap)` is a nondecreasing transform, so the bound
    /// carries over with the truncated means.
    pub truncated_at: Option<f64>,
    pub satisfied: bool,
    pub matches_product: bool,
}

/// Compares `E ∏ Yᵢ` with `g_U(n) ∏ E Yᵢ`.
pub fn verify_product_moment(
    spec: &DependenceSpec,
    marginal: &TailModel,
    n: usize,
    n_paths: u64,
    seed: u64,
) -> Result<ProductMomentReport> {
    check_dimension(n, 6)?;
    spec.validate()?;
    if marginal.support_min() < 0.0 {
        return Err(Error::pre("marginal must be nonnegative"));
    }
    let _ = marginal.finite_mean()?;
    let truncated_at = if marginal.moment(2.0).is_finite() {
        None
    } else {
        Some(marginal.tail_quantile(1e-6))
    };
    let mean = match truncated_at {
        None => marginal.finite_mean()?,
        // E min(Y, c) = ∫₀^c Ḡ(y) dy
        Some(c) => {
            let lo = marginal.support_min();
            lo + quad::integrate(|y| marginal.tail(y), lo, c, Tolerance::new(0.0, 1e-12))?
        }
    };
    let cap = truncated_at.unwrap_or(f64::INFINITY);
    let acc = par_fold(n_paths, |range| {
        let mut acc = MomentAccumulator::default();
        for i in range {
            let ys = fill_sequence(spec, marginal, n, &mut path_rng(seed, i));
            acc.push(ys.iter().map(|y| y.min(cap)).product());
        }
        acc
    });
    let est = acc.estimate();
    let coefficient = spec.coefficient(n as u64, Side::Upper);
    let product = mean.powi(n as i32);
    Ok(ProductMomentReport {
        n,
        lhs: est.mean,
        rhs: coefficient * product,
        coefficient,
        mc_stderr: est.stderr,
        truncated_at,
        satisfied: est.mean <= coefficient * product + 3.0 * est.stderr,
        matches_product: (est.mean - product).abs() <= 3.0 * est.stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    /// `y ↦ exp(−y)`, nonincreasing.
    NegateThenExp,
    /// `y ↦ a·y + b` with `a > 0`, nondecreasing.
    Affine { a: f64, b: f64 },
}

impl Transform {
    pub fn apply(&self, y: f64) -> f64 {
        match *self {
            Transform::NegateThenExp => (-y).exp(),
            Transform::Affine { a, b } => a * y + b,
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        matches!(self, Transform::Affine { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformReport {
    pub transform: Transform,
    /// Side of the source inequality.
    pub source_side: Side,
    /// Side checked on the transformed sequence: the same side for
    /// nondecreasing maps, the opposite side otherwise.
    pub report: InequalityReport,
}

/// Checks that `f(Y₁), ..., f(Yₙ)` inherit the `source_side` inequality of
/// `Y` with the same coefficient. `levels` are thresholds on the original
/// scale; the transformed thresholds are `f(level)`.
pub fn verify_monotone_transform(
    spec: &DependenceSpec,
    marginal: &TailModel,
    transform: Transform,
    source_side: Side,
    levels: &[f64],
    n_paths: u64,
    seed: u64,
) -> Result<TransformReport> {
    check_dimension(levels.len(), 6)?;
    if levels.len() < 2 {
        return Err(Error::pre("at least 2 levels are required"));
    }
    if let Transform::Affine { a, .. } = transform {
        if !(a > 0.0) {
            return Err(Error::param("affine slope must be positive"));
        }
    }
    spec.validate()?;
    let n = levels.len();
    let targets: Vec<f64> = levels.iter().map(|&y| transform.apply(y)).collect();
    let checked = if transform.is_nondecreasing() {
        source_side
    } else {
        source_side.flipped()
    };
    // Marginal probabilities of the transformed events, via the inverse map.
    let product: f64 = levels
        .iter()
        .map(|&y| match (transform.is_nondecreasing(), checked) {
            (true, Side::Upper) => marginal.tail(y),
            (true, Side::Lower) => marginal.cdf(y),
            // exp(−Y) <= exp(−y) iff Y >= y
            (false, Side::Lower) => marginal.tail(y),
            (false, Side::Upper) => marginal.cdf(y),
        })
        .product();
    let counts = count_events(spec, marginal, n, n_paths, seed, |ys| {
        ys.iter().zip(&targets).all(|(&y, &t)| {
            let v = transform.apply(y);
            match checked {
                Side::Upper => v > t,
                Side::Lower => v <= t,
            }
        })
    });
    Ok(TransformReport {
        transform,
        source_side,
        report: inequality_report(checked, n, spec.coefficient(n as u64, source_side), product, counts),
    })
}

/// Per-coordinate Kolmogorov–Smirnov distance between simulated coordinates
/// and the analytic marginal.
pub fn marginal_ks_distances(
    spec: &DependenceSpec,
    marginal: &TailModel,
    n: usize,
    n_paths: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    struct Columns(Vec<Vec<f64>>);
    impl Merge for Columns {
        fn merge(mut self, other: Self) -> Self {
            for (a, b) in self.0.iter_mut().zip(other.0) {
                a.extend(b);
            }
            self
        }
    }
    let Columns(mut cols) = par_fold(n_paths, |range| {
        let mut cols = vec![Vec::with_capacity((range.end - range.start) as usize); n];
        for i in range {
            for (c, y) in cols.iter_mut().zip(fill_sequence(spec, marginal, n, &mut path_rng(seed, i))) {
                c.push(y);
            }
        }
        Columns(cols)
    });
    Ok(cols
        .iter_mut()
        .map(|c| {
            c.sort_by(f64::total_cmp);
            let m = c.len() as f64;
            c.iter()
                .enumerate()
                .map(|(k, &y)| {
                    let f = marginal.cdf(y);
                    (f - k as f64 / m).abs().max(((k + 1) as f64 / m - f).abs())
                })
                .fold(0.0, f64::max)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SPARSE: DependenceSpec = DependenceSpec::FgmSparsePairs {
        theta: 0.5,
        max_pairs: None,
    };

    #[test]
    fn sparse_roles_and_counts() {
        let roles: Vec<PairRole> = (1..=9).map(|i| SPARSE.role(i)).collect();
        use PairRole::*;
        assert_eq!(roles, vec![Single, First, Second, First, Second, Single, Single, First, Second]);
        assert_eq!(SPARSE.pair_count(2), 0);
        assert_eq!(SPARSE.pair_count(3), 1);
        assert_eq!(SPARSE.pair_count(5), 2);
        assert_eq!(SPARSE.pair_count(8), 2);
        assert_eq!(SPARSE.pair_count(9), 3);
        let capped = DependenceSpec::FgmSparsePairs {
            theta: 0.5,
            max_pairs: Some(3),
        };
        assert_eq!(capped.role(16), Single);
        assert_eq!(capped.pair_count(1 << 20), 3);
        assert_eq!(capped.growth(Side::Upper), GrowthClass::Bounded { bound: 3.375 });
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(dominating_coefficient(&SPARSE, 5, Side::Upper).unwrap(), 2.25);
        assert_eq!(dominating_coefficient(&SPARSE, 2, Side::Upper).unwrap(), 1.0);
        assert_eq!(dominating_coefficient(&DependenceSpec::Independent, 1000, Side::Lower).unwrap(), 1.0);
        let neg = DependenceSpec::FgmSparsePairs {
            theta: -0.5,
            max_pairs: None,
        };
        assert_eq!(neg.coefficient(1000, Side::Lower), 1.0);
        let adj = DependenceSpec::FgmAllAdjacentPairs { theta: 0.5 };
        assert_eq!(adj.coefficient(7, Side::Upper), 1.5f64.powi(3));
        assert_eq!(adj.growth(Side::Upper), GrowthClass::Exponential);
        assert_eq!(
            SPARSE.growth(Side::Upper),
            GrowthClass::Polynomial {
                exponent: 1.5f64.log2()
            }
        );
    }

    #[test]
    fn conditional_inversion_round_trips() {
        for &theta in &[-1.0, -0.5, 0.0, 0.3, 1.0] {
            for &u in &[0.01, 0.3, 0.5, 0.77, 0.99] {
                for &w in &[1e-9, 0.2, 0.5, 0.9, 1.0 - 1e-9] {
                    let v = fgm_conditional(theta, u, w);
                    assert!((0.0..=1.0).contains(&v));
                    assert_relative_eq!(fgm_conditional_cdf(theta, v, u), w, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn generator_is_deterministic_and_positioned() {
        let m = TailModel::pareto(2.5, 1.0).unwrap();
        let a = generate_sequence(&SPARSE, &m, 10, 42).unwrap();
        let b = generate_sequence(&SPARSE, &m, 10, 42).unwrap();
        assert_eq!(a, b);
        // A shorter request is a prefix of a longer one.
        let c = generate_sequence(&SPARSE, &m, 4, 42).unwrap();
        assert_eq!(&a[..4], &c[..]);
        assert!(generate_sequence(&SPARSE, &m, 0, 42).is_err());
    }

    #[test]
    fn median_pair_survival_ratio() {
        // FGM survival copula at u = v = 1/2: 1 + θ/4.
        let m = TailModel::exponential(1.0).unwrap();
        let med = m.tail_quantile(0.5);
        for (theta, expected) in [(0.5, 1.125f64), (-0.5, 0.875)] {
            let spec = DependenceSpec::FgmSparsePairs { theta, max_pairs: None };
            let counts = count_events(&spec, &m, 3, 200_000, 3, |ys| ys[1] > med && ys[2] > med);
            let ratio = counts.hits as f64 / counts.n as f64 / 0.25;
            let se = (0.25 * expected * (1.0 - 0.25 * expected) / 2e5).sqrt() / 0.25;
            assert!((ratio - expected).abs() < 4.0 * se, "theta={theta}: {ratio}");
        }
    }

    proptest! {
        #[test]
        fn coefficients_are_monotone(n in 1u64..10_000, theta in -1.0f64..1.0) {
            for spec in [
                DependenceSpec::FgmSparsePairs { theta, max_pairs: None },
                DependenceSpec::FgmSparsePairs { theta, max_pairs: Some(3) },
                DependenceSpec::FgmAllAdjacentPairs { theta },
            ] {
                for side in [Side::Upper, Side::Lower] {
                    prop_assert!(spec.coefficient(n + 1, side) >= spec.coefficient(n, side));
                    prop_assert!(spec.coefficient(n, side) >= 1.0);
                }
                prop_assert_eq!(spec.coefficient(1, Side::Upper), 1.0);
            }
        }

        #[test]
        fn sparse_growth_is_polynomial(n in 4u64..1_000_000, theta in 0.01f64..1.0) {
            let spec = DependenceSpec::FgmSparsePairs { theta, max_pairs: None };
            let g = spec.coefficient(n, Side::Upper);
            prop_assert!(g.ln() / (n as f64).ln() <= (1.0 + theta).log2() + 0.01);
        }

        #[test]
        fn generated_uniforms_stay_in_unit_interval(seed in any::<u64>(), theta in -1.0f64..=1.0) {
            let spec = DependenceSpec::FgmAllAdjacentPairs { theta };
            let mut gen = DependentUniforms::new(spec);
            let mut rng = path_rng(seed, 0);
            for _ in 0..64 {
                let d = gen.next(&mut rng);
                prop_assert!(d.survival > 0.0 && d.survival < 1.0);
            }
        }
    }
}
