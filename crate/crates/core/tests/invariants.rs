//! Cross-module properties over randomly drawn parameters.

use proptest::prelude::*;
use ruin_sim::dependence::{dominating_coefficient, generate_sequence, DependenceSpec, Side};
use ruin_sim::deviations::ld_ratio_enod;
use ruin_sim::estimate::{Estimator, RuinEstimate};
use ruin_sim::renewal::{simulate_arrivals, ArrivalModel};
use ruin_sim::ruin::{ruin_surface, ClaimModel, HorizonFunction, RiskModel};
use ruin_sim::{ExtReal, TailModel};

fn dependence(which: usize, theta: f64) -> DependenceSpec {
    match which {
        0 => DependenceSpec::Independent,
        1 => DependenceSpec::FgmSparsePairs { theta, max_pairs: Some(3) },
        2 => DependenceSpec::FgmSparsePairs { theta, max_pairs: None },
        _ => DependenceSpec::FgmAllAdjacentPairs { theta },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn crude_estimates_bracket_and_match_binomial_stderr(n in 1u64..1_000_000, frac in 0.0f64..=1.0) {
        let hits = (frac * n as f64).floor() as u64;
        let e = RuinEstimate::from_hits(hits, n);
        let p = hits as f64 / n as f64;
        prop_assert!(e.ci95.0 <= e.p_hat && e.p_hat <= e.ci95.1);
        prop_assert!((e.stderr - (p * (1.0 - p) / n as f64).sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn tails_are_one_below_support_and_pareto_mean_needs_alpha_above_one(
        alpha in 0.2f64..5.0,
        xm in 0.1f64..10.0,
        below in 0.0f64..1.0,
    ) {
        let g = TailModel::pareto(alpha, xm).unwrap();
        prop_assert_eq!(g.tail(below * xm), 1.0);
        prop_assert_eq!(g.mean().is_finite(), alpha > 1.0);
        if let ExtReal::Finite(m) = g.mean() {
            prop_assert!((m - alpha * xm / (alpha - 1.0)).abs() <= 1e-12 * m);
        }
    }

    #[test]
    fn sparse_coefficient_counts_pairs_inside_the_window(n in 1u64..100_000, theta in 0.0f64..1.0) {
        // K(n) = #{k ≥ 1 : 2^k + 1 ≤ n}
        let k = (1..64).take_while(|&k| (1u64 << k) < n).count() as i32;
        let spec = DependenceSpec::FgmSparsePairs { theta, max_pairs: None };
        for side in [Side::Upper, Side::Lower] {
            let g = dominating_coefficient(&spec, n, side).unwrap();
            prop_assert!((g - (1.0 + theta).powi(k)).abs() <= 1e-12 * g);
        }
        prop_assert_eq!(dominating_coefficient(&spec, 1, Side::Upper).unwrap(), 1.0);
    }

    #[test]
    fn sequences_are_reproducible_and_in_support(
        seed in any::<u64>(),
        n in 1usize..40,
        which in 0usize..4,
        theta in -1.0f64..=1.0,
    ) {
        let spec = dependence(which, theta);
        let g = TailModel::pareto(2.5, 1.0).unwrap();
        let a = generate_sequence(&spec, &g, n, seed).unwrap();
        prop_assert_eq!(&a, &generate_sequence(&spec, &g, n, seed).unwrap());
        prop_assert!(a.iter().all(|&y| y >= 1.0 && y.is_finite()));
    }

    #[test]
    fn arrival_counts_equal_partial_sums_below_t(seed in any::<u64>(), t in 0.0f64..50.0) {
        let model = ArrivalModel::new(
            TailModel::weibull(0.5, 1.0).unwrap(),
            DependenceSpec::FgmSparsePairs { theta: -0.5, max_pairs: None },
        )
        .unwrap();
        let path = simulate_arrivals(&model, 50.0, seed).unwrap();
        prop_assert!(path.arrival_times.windows(2).all(|w| w[0] < w[1]));
        let direct = path.arrival_times.iter().filter(|&&s| s <= t).count() as u64;
        prop_assert_eq!(path.count_at(t), direct);
    }

    #[test]
    fn horizon_function_decreases_past_its_turning_point(
        a in 1.0f64..4.0,
        b in 0.05f64..0.95,
        steps in prop::collection::vec(0.01f64..2.0, 1..20),
    ) {
        let g = HorizonFunction::power_log(a, b);
        let mut x = g.decreasing_from().unwrap();
        let mut last = g.eval(x);
        for dx in steps {
            x *= 1.0 + dx;
            let v = g.eval(x);
            prop_assert!(v < last);
            last = v;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn coupled_ruin_estimates_are_monotone(
        seed in any::<u64>(),
        which in 0usize..3,
        x0 in 1.0f64..20.0,
        t0 in 1.0f64..10.0,
    ) {
        let claims = ClaimModel {
            marginal: TailModel::pareto(2.5, 1.0).unwrap(),
            dependence: dependence(which, 0.5),
        };
        let model = RiskModel::new(claims, ArrivalModel::poisson(1.0).unwrap(), 2.0).unwrap();
        let xs = [x0, 2.0 * x0, 4.0 * x0];
        let ts = [t0, 2.0 * t0, 4.0 * t0];
        let s = ruin_surface(&model, &xs, &ts, 2_000, seed, Estimator::Crude).unwrap();
        for ix in 0..3 {
            for it in 0..3 {
                let p = s.get(ix, it).p_hat;
                if ix > 0 {
                    prop_assert!(p <= s.get(ix - 1, it).p_hat);
                }
                if it > 0 {
                    prop_assert!(p >= s.get(ix, it - 1).p_hat);
                }
            }
        }
    }

    #[test]
    fn deviation_cells_stay_in_the_uniformity_region(seed in any::<u64>(), k in 11u32..40) {
        let g = TailModel::pareto(2.5, 1.0).unwrap();
        let claims = ClaimModel { marginal: g, dependence: DependenceSpec::Independent };
        let gamma = f64::from(k) / 10.0 * g.finite_mean().unwrap();
        let grid = ld_ratio_enod(&claims, gamma, &[2, 5, 9], 4_096, seed).unwrap();
        prop_assert!(grid.cells.iter().all(|c| c.x >= grid.gamma * c.n as f64));
    }
}
