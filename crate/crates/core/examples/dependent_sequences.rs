//! Dominating coefficients of the FGM coupling patterns and Monte Carlo
//! checks of the orthant and product-moment inequalities they imply.
//!
//! ```text
//! cargo run --release --example dependent_sequences
//! ```

use ruin_sim::dependence::{
    dominating_coefficient, generate_sequence, verify_monotone_transform, verify_orthant_inequality,
    verify_product_moment, DependenceSpec, Side, Transform,
};
use ruin_sim::TailModel;

fn main() -> ruin_sim::Result<()> {
    let specs = [
        DependenceSpec::Independent,
        DependenceSpec::FgmSparsePairs { theta: 0.5, max_pairs: Some(3) },
        DependenceSpec::FgmSparsePairs { theta: 0.5, max_pairs: None },
        DependenceSpec::FgmAllAdjacentPairs { theta: 0.5 },
    ];
    let pareto = TailModel::pareto(2.5, 1.0)?;

    println!("g_U(n) at n = 2, 8, 64, 1024 and growth class");
    for spec in &specs {
        let g: Vec<String> = [2, 8, 64, 1024]
            .iter()
            .map(|&n| dominating_coefficient(spec, n, Side::Upper).map(|g| format!("{g:>11.4e}")))
            .collect::<ruin_sim::Result<_>>()?;
        println!("{:<60} {}  {}", format!("{spec:?}"), g.join(" "), spec.growth(Side::Upper));
    }

    let dyadic = specs[2];
    let ys = generate_sequence(&dyadic, &pareto, 8, 7)?;
    println!("\none dyadic sequence: {ys:.3?}");

    println!("\northant and moment checks, 1e6 paths");
    for side in [Side::Upper, Side::Lower] {
        let r = verify_orthant_inequality(&dyadic, &pareto, &[2.0, 2.0, 2.0], side, 1_000_000, 11)?;
        println!(
            "{side:?}: lhs {:.5} ± {:.5}, g·∏ {:.5}, independent ∏ {:.5}, satisfied {}",
            r.lhs, r.mc_stderr, r.rhs, r.product, r.satisfied
        );
    }
    let m = verify_product_moment(&dyadic, &TailModel::exponential(1.0)?, 3, 1_000_000, 12)?;
    println!("E∏Y: {:.4} ± {:.4} against {:.4}, satisfied {}", m.lhs, m.mc_stderr, m.rhs, m.satisfied);

    let t = verify_monotone_transform(&dyadic, &pareto, Transform::NegateThenExp, Side::Upper, &[2.0, 2.0], 1_000_000, 13)?;
    println!(
        "exp(−Y) inherits the upper bound as a lower bound: {:?} side, lhs {:.5}, rhs {:.5}, satisfied {}",
        t.report.side, t.report.lhs, t.report.rhs, t.report.satisfied
    );
    Ok(())
}
