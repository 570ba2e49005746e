//! Uniformity of `ψ(x;t) ≈ λ(t)·Ḡ(x)` over the horizon window
//! `t ∈ (μ_H, x·g(x)]` as `x` grows.
//!
//! ```text
//! cargo run --release --example uniform_scan
//! ```

use ruin_sim::dependence::DependenceSpec;
use ruin_sim::renewal::ArrivalModel;
use ruin_sim::ruin::{horizon_condition_check, uniform_ratio_scan, ClaimModel, HorizonFunction, RiskModel};
use ruin_sim::tails::log_grid;
use ruin_sim::TailModel;

fn main() -> ruin_sim::Result<()> {
    let claims = ClaimModel {
        marginal: TailModel::pareto(2.5, 1.0)?,
        dependence: DependenceSpec::FgmSparsePairs { theta: 0.5, max_pairs: Some(3) },
    };
    let model = RiskModel::new(claims, ArrivalModel::poisson(1.0)?, 2.0)?;
    let g = HorizonFunction::power_log(2.0, 0.5);
    println!(
        "ln x/(x g(x)) eventually decreasing to 0: {}",
        horizon_condition_check(&g, &log_grid(10.0, 1e12, 64))?
    );

    let scan = uniform_ratio_scan(&model, &[200.0, 400.0, 800.0], &g, 8, 20_000, 3)?;
    for s in &scan.suprema {
        println!(
            "x = {:>4}: window top {:>9.1}, sup |ratio − 1| = {}, {} of {} cells conclusive",
            s.x,
            g.horizon(s.x),
            s.sup_deviation.map_or("n/a".into(), |d| format!("{d:.4}")),
            s.conclusive_cells,
            s.cells
        );
    }
    Ok(())
}
