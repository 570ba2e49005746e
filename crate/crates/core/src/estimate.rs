use serde::{Deserialize, Serialize};

use crate::stream::{CompensatedSum, Merge};

/// Below this many equivalent events an estimate is flagged inconclusive.
pub const MIN_EVENTS: f64 = 50.0;

const Z95: f64 = 1.959_963_984_540_054;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl McEstimate {
    /// An analytically known value.
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
            n: 0,
        }
    }

    pub fn ci95(&self) -> (f64, f64) {
        (self.mean - Z95 * self.stderr, self.mean + Z95 * self.stderr)
    }

    /// `(mean/stderr)²`: the event count a crude binomial estimator would
    /// need for the same relative precision.
    pub fn equivalent_events(&self) -> f64 {
        equivalent_events(self.mean, self.stderr)
    }

    pub fn is_conclusive(&self) -> bool {
        self.equivalent_events() >= MIN_EVENTS
    }
}

fn equivalent_events(mean: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        (mean / stderr).powi(2)
    } else if mean > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Indicator averaging.
    #[default]
    Crude,
    /// Conditioning on every variable except the largest claim.
    Conditional,
}

/// A ruin or tail probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuinEstimate {
    pub p_hat: f64,
    pub n_paths: u64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// Paths with a nonzero contribution (ruin events for the crude
    /// estimator).
    pub events: u64,
    pub estimator: Estimator,
}

impl RuinEstimate {
    pub fn from_hits(hits: u64, n_paths: u64) -> Self {
        let n = n_paths.max(1) as f64;
        let p = hits as f64 / n;
        let stderr = (p * (1.0 - p) / n).sqrt();
        Self::assemble(p, stderr, n_paths, hits, Estimator::Crude)
    }

    pub fn from_moments(acc: &MomentAccumulator, estimator: Estimator) -> Self {
        let est = acc.estimate();
        Self::assemble(est.mean, est.stderr, acc.n, acc.positive, estimator)
    }

    fn assemble(p: f64, stderr: f64, n_paths: u64, events: u64, estimator: Estimator) -> Self {
        let lo = (p - Z95 * stderr).max(0.0);
        let hi = (p + Z95 * stderr).min(1.0);
        Self {
            p_hat: p,
            n_paths,
            stderr,
            ci95: (lo, hi),
            events,
            estimator,
        }
    }

    pub fn equivalent_events(&self) -> f64 {
        equivalent_events(self.p_hat, self.stderr)
    }

    pub fn is_conclusive(&self) -> bool {
        self.equivalent_events() >= MIN_EVENTS
    }
}

/// Running first and second moments of per-path contributions.
#[derive(Debug, Clone, Copy, Default)]
pub struct MomentAccumulator {
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
    n: u64,
    positive: u64,
}

impl MomentAccumulator {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.sum.add(x);
        self.sum_sq.add(x * x);
        self.n += 1;
        if x > 0.0 {
            self.positive += 1;
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum.value() / self.n as f64
        }
    }

    pub fn estimate(&self) -> McEstimate {
        let n = self.n as f64;
        let mean = self.mean();
        let stderr = if self.n > 1 {
            let var = ((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean,
            stderr,
            n: self.n,
        }
    }
}

impl Merge for MomentAccumulator {
    fn merge(self, other: Self) -> Self {
        Self {
            sum: self.sum.merge(other.sum),
            sum_sq: self.sum_sq.merge(other.sum_sq),
            n: self.n + other.n,
            positive: self.positive + other.positive,
        }
    }
}

/// Counts of events among paths.
#[derive(Debug, Clone, Copy, Default)]
pub struct HitCounter {
    pub hits: u64,
    pub n: u64,
}

impl Merge for HitCounter {
    fn merge(self, other: Self) -> Self {
        Self {
            hits: self.hits + other.hits,
            n: self.n + other.n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_stderr_and_interval() {
        let e = RuinEstimate::from_hits(100, 10_000);
        assert_eq!(e.p_hat, 0.01);
        assert!((e.stderr - (0.01f64 * 0.99 / 1e4).sqrt()).abs() < 1e-15);
        assert!(e.ci95.0 < e.p_hat && e.p_hat < e.ci95.1);
        assert!(e.is_conclusive());
        let zero = RuinEstimate::from_hits(0, 10_000);
        assert_eq!(zero.ci95, (0.0, 0.0));
        assert!(!zero.is_conclusive());
    }

    #[test]
    fn moments_match_direct_formula() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let mut acc = MomentAccumulator::default();
        xs.iter().for_each(|&x| acc.push(x));
        let est = acc.estimate();
        assert_eq!(est.mean, 3.75);
        let var = xs.iter().map(|x| (x - 3.75f64).powi(2)).sum::<f64>() / 3.0;
        assert!((est.stderr - (var / 4.0).sqrt()).abs() < 1e-14);
    }
}
