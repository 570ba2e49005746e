//! Moments of the counting process `N(t)` for Poisson and FGM-coupled
//! Weibull inter-arrival times.
//!
//! ```text
//! cargo run --release --example renewal_counting
//! ```

use ruin_sim::dependence::DependenceSpec;
use ruin_sim::renewal::{moment_q_ratio, n_tau_moment, renewal_function_mc, truncated_exp_moment, ArrivalModel, RandomHorizon};
use ruin_sim::TailModel;

fn main() -> ruin_sim::Result<()> {
    let poisson = ArrivalModel::poisson(1.0)?;
    let weibull = ArrivalModel::new(
        TailModel::weibull(0.5, 1.0)?,
        DependenceSpec::FgmSparsePairs { theta: -0.5, max_pairs: None },
    )?;

    for (name, model) in [("Poisson(1)", &poisson), ("Weibull(0.5), dyadic FGM -0.5", &weibull)] {
        println!("{name}, mean inter-arrival {:.3}", model.mean_interarrival());
        for t in [100.0, 1000.0, 10_000.0] {
            let en = renewal_function_mc(model, t, 10_000, 1)?;
            let q1 = moment_q_ratio(model, 1.0, t, 10_000, 2)?;
            let q2 = moment_q_ratio(model, 2.0, t, 10_000, 3)?;
            println!(
                "  t = {t:>7}: EN(t) = {:>10.2} ± {:.2}   E N^q/(t/μ)^q: q=1 {:.4}, q=2 {:.4}",
                en.mean, en.stderr, q1.mean, q2.mean
            );
        }
        for t in [50.0, 100.0, 200.0] {
            let m = truncated_exp_moment(model, 0.05, 0.5, t, 10_000, 4)?;
            println!(
                "  E exp(0.05 N(t)) 1{{N(t) > 1.5 t/μ}} at t = {t:>4}: {:.4e} ± {:.1e}",
                m.estimate.mean, m.estimate.stderr
            );
        }
    }

    println!("\nE N(τ)^2 for Poisson(1) arrivals");
    for tau in [RandomHorizon::Pareto { alpha: 2.5, xm: 1.0 }, RandomHorizon::Pareto { alpha: 1.5, xm: 1.0 }] {
        let m = n_tau_moment(&poisson, &tau, 2.0, 10_000, 5)?;
        println!(
            "  {tau:?}: {:.3} ± {:.3}, E τ^2 = {}, diverging {}",
            m.estimate.mean, m.estimate.stderr, m.tau_moment, m.diverging
        );
    }
    Ok(())
}
