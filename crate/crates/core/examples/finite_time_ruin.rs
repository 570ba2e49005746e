//! Finite-time ruin probabilities against the one-big-jump approximant
//! `λ(t)·Ḡ(x)`, with crude and conditional estimators.
//!
//! ```text
//! cargo run --release --example finite_time_ruin
//! ```

use ruin_sim::dependence::DependenceSpec;
use ruin_sim::estimate::Estimator;
use ruin_sim::renewal::{ArrivalModel, RandomHorizon};
use ruin_sim::ruin::{asymptotic_approx, ruin_surface, ClaimModel, RiskModel};
use ruin_sim::TailModel;

fn main() -> ruin_sim::Result<()> {
    let claims = ClaimModel {
        marginal: TailModel::pareto(2.5, 1.0)?,
        dependence: DependenceSpec::FgmSparsePairs { theta: 0.5, max_pairs: Some(3) },
    };
    let model = RiskModel::new(claims, ArrivalModel::poisson(1.0)?, 2.0)?;
    let xs = [20.0, 40.0, 80.0];
    let ts = [10.0];

    for estimator in [Estimator::Crude, Estimator::Conditional] {
        let surface = ruin_surface(&model, &xs, &ts, 1_000_000, 42, estimator)?;
        println!("{estimator:?}");
        for (ix, &x) in xs.iter().enumerate() {
            let psi = surface.get(ix, 0);
            let approx = asymptotic_approx(&model, x, &RandomHorizon::Deterministic { t: ts[0] }, 1, 0)?;
            println!(
                "  x = {x:>3}: ψ = {:.4e} ± {:.1e}, λ(t)Ḡ(x) = {:.4e}, ratio {:.4}",
                psi.p_hat,
                psi.stderr,
                approx.value,
                psi.p_hat / approx.value
            );
        }
    }
    Ok(())
}
