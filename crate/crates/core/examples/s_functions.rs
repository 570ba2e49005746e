//! The weight functions `s = s₁·s₂` behind the WUOD tail inequality, and a
//! Monte Carlo fit of the inequality's constant.
//!
//! ```text
//! cargo run --release --example s_functions
//! ```

use ruin_sim::dependence::DependenceSpec;
use ruin_sim::deviations::{construct_s_pair, tail_inequality_probe, v_plus};
use ruin_sim::ruin::ClaimModel;
use ruin_sim::TailModel;

fn main() -> ruin_sim::Result<()> {
    let pareto = TailModel::pareto(2.5, 1.0)?;
    let pair = construct_s_pair(2.0, &pareto)?;
    println!("r = {}, l0 = {:.4}, {} breakpoints", pair.r, pair.l0, pair.breakpoints.len());
    let first: Vec<String> = pair.breakpoints.iter().take(4).map(|b| format!("{b:.3e}")).collect();
    println!("first breakpoints: {}", first.join(", "));
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "x", "s1", "s2", "s", "V+_s(x)");
    for x in [10.0, 1e2, 1e3, 1e4, 1e5] {
        println!(
            "{x:>10.0} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            pair.s1(x),
            pair.s2(x),
            pair.s(x),
            v_plus(&pair, x)?
        );
    }

    let claims = ClaimModel {
        marginal: pareto,
        dependence: DependenceSpec::FgmSparsePairs { theta: 0.5, max_pairs: None },
    };
    let gamma = 2.0 * pareto.finite_mean()?;
    let probe = tail_inequality_probe(&claims, &pair, 0.5, 0.5, gamma, &[25, 50], &[100.0, 400.0], 50_000, 3)?;
    println!(
        "\nfitted C = {}, {} cells, {} unabsorbable",
        probe.fitted_c.map_or("none".into(), |c| format!("{c:.4}")),
        probe.cells.len(),
        probe.violations.len()
    );
    Ok(())
}
