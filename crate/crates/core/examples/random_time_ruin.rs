//! Ruin before an independent random horizon `τ`, and the hypothesis gate
//! that rejects horizons heavier than the claims.
//!
//! ```text
//! cargo run --release --example random_time_ruin
//! ```

use ruin_sim::dependence::DependenceSpec;
use ruin_sim::renewal::{ArrivalModel, RandomHorizon};
use ruin_sim::ruin::{asymptotic_approx, ruin_curve_random, ClaimModel, RiskModel};
use ruin_sim::TailModel;

fn main() -> ruin_sim::Result<()> {
    let claims = ClaimModel {
        marginal: TailModel::pareto(2.5, 1.0)?,
        dependence: DependenceSpec::FgmSparsePairs { theta: 0.5, max_pairs: Some(3) },
    };
    let model = RiskModel::new(claims, ArrivalModel::poisson(1.0)?, 2.0)?;
    let tau = RandomHorizon::Exponential { rate: 0.1 };
    let xs = [20.0, 40.0, 80.0];

    let curve = ruin_curve_random(&model, &xs, &tau, 2_000_000, 7)?;
    for (&x, psi) in xs.iter().zip(&curve) {
        let approx = asymptotic_approx(&model, x, &tau, 1, 0)?;
        println!(
            "x = {x:>3}: ψ(x;τ) = {:.4e} ± {:.1e}, E N(τ)·Ḡ(x) = {:.4e}, ratio {:.4}",
            psi.p_hat,
            psi.stderr,
            approx.value,
            psi.p_hat / approx.value
        );
    }

    let heavy = RandomHorizon::Pareto { alpha: 1.5, xm: 1.0 };
    println!("\nτ ~ {heavy:?}:");
    for v in model.hypothesis_violations(&heavy) {
        println!("  {v}");
    }
    Ok(())
}
