//! Tail indices and numerical class diagnostics for the built-in claim
//! families.
//!
//! ```text
//! cargo run --release --example tail_classes
//! ```

use ruin_sim::tails::{class_diagnostics, convolution_tail_ratio, TailModel};

fn main() -> ruin_sim::Result<()> {
    let models = [
        TailModel::pareto(2.5, 1.0)?,
        TailModel::pareto(1.5, 1.0)?,
        TailModel::weibull(0.5, 1.0)?,
        TailModel::lognormal(0.0, 1.0)?,
        TailModel::exponential(1.0)?,
    ];
    println!("{:<34} {:>8} {:>8} {:>8}  C     D     S     S*    insensitive", "model", "J+", "J-", "M");
    for g in &models {
        let ix = g.indices();
        let d = class_diagnostics(g)?;
        let s_star = d.in_s_star.map_or("n/a".to_string(), |b| b.to_string());
        println!(
            "{:<34} {:>8} {:>8} {:>8}  {:<5} {:<5} {:<5} {:<5} {}",
            g.to_string(),
            ix.j_plus.to_string(),
            ix.j_minus.to_string(),
            ix.moment_index.to_string(),
            d.in_c,
            d.in_d,
            d.in_s,
            s_star,
            d.insensitive
        );
    }

    println!("\nP(Y1+Y2 > x) / (2 P(Y > x)) for independent copies:");
    for g in &models {
        let ratios: Vec<String> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&x| convolution_tail_ratio(g, x).map_or("underflow".into(), |r| format!("{r:>9.4}")))
            .collect();
        println!("{:<34} {}", g.to_string(), ratios.join(" "));
    }
    Ok(())
}
