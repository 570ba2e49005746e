//! Precise large deviations of claim sums: the ENOD equivalence
//! `P(S_n > x) ∼ n·Ḡ(x − nμ)` and the WUOD upper and lower bounds.
//!
//! ```text
//! cargo run --release --example large_deviations
//! ```

use ruin_sim::dependence::DependenceSpec;
use ruin_sim::deviations::{ld_bounds_wuod, ld_ratio_enod};
use ruin_sim::ruin::ClaimModel;
use ruin_sim::TailModel;

fn main() -> ruin_sim::Result<()> {
    let pareto = TailModel::pareto(2.5, 1.0)?;
    let mu = pareto.finite_mean()?;
    let capped = ClaimModel {
        marginal: pareto,
        dependence: DependenceSpec::FgmSparsePairs { theta: 0.5, max_pairs: Some(3) },
    };
    let grid = ld_ratio_enod(&capped, 2.0 * mu, &[25, 50, 100], 50_000, 1)?;
    println!("ENOD, γ = {:.3}: max |ratio − 1| per n", grid.gamma);
    for (n, dev) in grid.max_deviation_by_n() {
        println!("  n = {n:>3}: {}", dev.map_or("n/a".into(), |d| format!("{d:.4}")));
    }

    let dyadic = ClaimModel {
        marginal: pareto,
        dependence: DependenceSpec::FgmSparsePairs { theta: 0.5, max_pairs: None },
    };
    let b = ld_bounds_wuod(&dyadic, 2.0 * mu, 2.0, &[25, 50, 100], 50_000, 2)?;
    println!(
        "\nWUOD, d = {:.4}, v = {:.4}: observed ratios in [{:.4}, {:.4}], bounds [{}, {:.4}]",
        b.d,
        b.v,
        b.observed_inf.unwrap_or(f64::NAN),
        b.observed_sup.unwrap_or(f64::NAN),
        b.lower_target,
        b.upper_target
    );
    Ok(())
}
