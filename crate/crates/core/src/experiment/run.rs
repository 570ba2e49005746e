use crate::dependence::{
    marginal_ks_distances, verify_monotone_transform, verify_orthant_inequality, verify_product_moment, InequalityReport,
    Side, Transform,
};
use crate::deviations::{construct_s_pair, ld_bounds_wuod, ld_ratio_enod, tail_inequality_probe, DeviationGrid};
use crate::error::Result;
use crate::estimate::RuinEstimate;
use crate::renewal::{moment_q_ratio, n_tau_moment, truncated_exp_moment, RandomHorizon};
use crate::ruin::{expected_claims, ruin_curve_random, ruin_surface, uniform_ratio_scan};
use crate::stream::derive_seed;
use crate::tails::class_diagnostics;

use super::config::{Experiment, ExperimentConfig};
use super::gates::resolve_gamma;
use super::plot::LinePlot;
use super::report::{num, opt, ReportBundle, Table};

const RUIN_COLUMNS: &[&str] = &["psi_mc", "stderr", "ci_lo", "ci_hi", "events"];

fn estimate_fields(p: &RuinEstimate) -> Vec<String> {
    vec![num(p.p_hat), num(p.stderr), num(p.ci95.0), num(p.ci95.1), p.events.to_string()]
}

fn columns(lead: &[&'static str], tail: &[&'static str]) -> Vec<&'static str> {
    lead.iter().chain(RUIN_COLUMNS).chain(tail).copied().collect()
}

#[derive(Default)]
struct Builder {
    tables: Vec<Table>,
    plots: Vec<LinePlot>,
    conclusive: usize,
    total: usize,
}

impl Builder {
    fn count(&mut self, conclusive: bool) {
        self.total += 1;
        self.conclusive += conclusive as usize;
    }

    fn finish(self) -> ReportBundle {
        ReportBundle {
            tables: self.tables,
            plots: self.plots,
            violations: Vec::new(),
            conclusive_cells: self.conclusive,
            total_cells: self.total,
        }
    }
}

/// Runs the simulation part of an experiment. Gates are not evaluated here.
pub(crate) fn simulate(config: &ExperimentConfig) -> Result<ReportBundle> {
    let n = config.n_paths;
    let seed = config.master_seed;
    let mut b = Builder::default();
    match &config.experiment {
        Experiment::RuinFinite {
            model,
            x_grid,
            t_grid,
            estimator,
        } => {
            let surface = ruin_surface(model, x_grid, t_grid, n, seed, *estimator)?;
            let en = t_grid
                .iter()
                .map(|&t| expected_claims(model, &RandomHorizon::Deterministic { t }, n, derive_seed(seed, 1)))
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(
                "ruin_finite",
                &columns(&["x", "t"], &["en_t", "approx", "ratio", "conclusive"]),
            );
            let mut series = vec![Vec::new(); t_grid.len()];
            for (ix, &x) in x_grid.iter().enumerate() {
                for (it, &t) in t_grid.iter().enumerate() {
                    let p = surface.get(ix, it);
                    let approx = en[it].mean * model.claims.marginal.tail(x);
                    let ratio = p.p_hat / approx;
                    b.count(p.is_conclusive());
                    series[it].push((x, ratio));
                    let mut row = vec![num(x), num(t)];
                    row.extend(estimate_fields(p));
                    row.extend([num(en[it].mean), num(approx), num(ratio), p.is_conclusive().to_string()]);
                    table.push(row);
                }
            }
            let mut plot = LinePlot::new("ruin_finite_ratio", "ψ(x;t) / (λ(t)Ḡ(x))", "x", "ratio");
            for (pts, t) in series.into_iter().zip(t_grid) {
                plot.add(format!("t = {t}"), pts);
            }
            b.tables.push(table);
            b.plots.push(plot);
        }
        Experiment::RuinRandom { model, tau, x_grid } => {
            let curve = ruin_curve_random(model, x_grid, tau, n, seed)?;
            let en = expected_claims(model, tau, n, derive_seed(seed, 1))?;
            let mut table = Table::new(
                "ruin_random",
                &columns(&["x"], &["en_tau", "en_tau_stderr", "approx", "ratio", "conclusive"]),
            );
            let mut series = Vec::new();
            for (p, &x) in curve.iter().zip(x_grid) {
                let approx = en.mean * model.claims.marginal.tail(x);
                let ratio = p.p_hat / approx;
                b.count(p.is_conclusive());
                series.push((x, ratio));
                let mut row = vec![num(x)];
                row.extend(estimate_fields(p));
                row.extend([
                    num(en.mean),
                    num(en.stderr),
                    num(approx),
                    num(ratio),
                    p.is_conclusive().to_string(),
                ]);
                table.push(row);
            }
            let mut plot = LinePlot::new("ruin_random_ratio", "ψ(x;τ) / (E N(τ)Ḡ(x))", "x", "ratio");
            plot.add(tau.to_string(), series);
            b.tables.push(table);
            b.plots.push(plot);
        }
        Experiment::UniformScan {
            model,
            horizon_function,
            x_grid,
            t_points_per_x,
        } => {
            let scan = uniform_ratio_scan(model, x_grid, horizon_function, *t_points_per_x, n, seed)?;
            let mut table = Table::new("uniform_scan", &["x", "t", "psi_mc", "stderr", "en_t", "approx", "ratio"]);
            let mut plot = LinePlot::new("uniform_scan_ratio", "ψ(x;t) / (λ(t)Ḡ(x))", "t", "ratio");
            for sup in &scan.suprema {
                let cells: Vec<_> = scan.cells.iter().filter(|c| c.x == sup.x).collect();
                for c in &cells {
                    b.count(c.conclusive);
                    table.push(vec![
                        num(c.x),
                        num(c.t),
                        num(c.psi.p_hat),
                        num(c.psi.stderr),
                        num(c.expected_claims),
                        num(c.approx),
                        num(c.ratio),
                    ]);
                }
                // Summary row: the supremum of |ratio − 1| over conclusive cells.
                table.push(vec![
                    num(sup.x),
                    "sup".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    opt(sup.sup_deviation),
                ]);
                plot.add(format!("x = {}", sup.x), cells.iter().map(|c| (c.t, c.ratio)).collect());
            }
            b.tables.push(table);
            b.plots.push(plot);
        }
        Experiment::LdEnod { model, gamma, n_grid } => {
            let gamma = resolve_gamma(model, *gamma)?;
            let grid = ld_ratio_enod(&model.claims, gamma, n_grid, n, seed)?;
            deviation_tables(&mut b, "ld_enod", &grid);
        }
        Experiment::LdWuod {
            model,
            gamma,
            r,
            n_grid,
            probe,
        } => {
            let gamma = resolve_gamma(model, *gamma)?;
            let report = ld_bounds_wuod(&model.claims, gamma, *r, n_grid, n, seed)?;
            deviation_tables(&mut b, "ld_wuod", &report.grid);
            let mut fitted = None;
            if let Some(spec) = probe {
                let pair = construct_s_pair(*r, &model.claims.marginal)?;
                let rep = tail_inequality_probe(
                    &model.claims,
                    &pair,
                    spec.v,
                    spec.theta,
                    gamma,
                    n_grid,
                    &spec.x_grid,
                    n,
                    derive_seed(seed, 2),
                )?;
                let mut table = Table::new(
                    "ld_wuod_probe",
                    &["n", "x", "p_hat", "stderr", "single_term", "dependence_term", "required_c"],
                );
                for c in &rep.cells {
                    table.push(vec![
                        c.n.to_string(),
                        num(c.x),
                        num(c.p_hat),
                        num(c.stderr),
                        num(c.single_term),
                        num(c.dependence_term),
                        num(c.required_c),
                    ]);
                }
                b.tables.push(table);
                fitted = Some(rep.fitted_c.unwrap_or(f64::INFINITY));
            }
            let mut summary = Table::new(
                "ld_wuod_bounds",
                &[
                    "d",
                    "r",
                    "v",
                    "gamma",
                    "upper_target",
                    "lower_target",
                    "lower_bound_applies",
                    "observed_inf",
                    "observed_sup",
                    "probe_fitted_c",
                ],
            );
            summary.push(vec![
                num(report.d),
                num(report.r),
                num(report.v),
                num(gamma),
                num(report.upper_target),
                num(report.lower_target),
                report.lower_bound_applies.to_string(),
                opt(report.observed_inf),
                opt(report.observed_sup),
                opt(fitted),
            ]);
            b.tables.push(summary);
        }
        Experiment::RenewalMoments {
            arrivals,
            t_grid,
            q_grid,
            truncated,
            horizons,
        } => {
            let mut moments = Table::new("renewal_moments", &["q", "t", "ratio", "stderr"]);
            let mut plot = LinePlot::new("renewal_moments_ratio", "E N^q(t) / (t/μ_H)^q", "t", "ratio");
            for &q in q_grid {
                let mut series = Vec::new();
                for &t in t_grid {
                    let est = moment_q_ratio(arrivals, q, t, n, derive_seed(seed, 10))?;
                    b.count(est.is_conclusive());
                    series.push((t, est.mean));
                    moments.push(vec![num(q), num(t), num(est.mean), num(est.stderr)]);
                }
                plot.add(format!("q = {q}"), series);
            }
            b.tables.push(moments);
            b.plots.push(plot);
            let mut trunc = Table::new(
                "truncated_moment",
                &["t", "r", "delta", "threshold", "estimate", "stderr", "saturated", "tilt"],
            );
            for &t in &truncated.t_grid {
                let m = truncated_exp_moment(arrivals, truncated.r, truncated.delta, t, n, derive_seed(seed, 11))?;
                b.count(m.estimate.is_conclusive());
                trunc.push(vec![
                    num(t),
                    num(truncated.r),
                    num(truncated.delta),
                    num(m.threshold),
                    num(m.estimate.mean),
                    num(m.estimate.stderr),
                    m.saturated.to_string(),
                    num(m.tilt),
                ]);
            }
            b.tables.push(trunc);
            if !horizons.is_empty() {
                let mut table = Table::new(
                    "n_tau_moment",
                    &["horizon", "p", "estimate", "stderr", "tau_moment", "growth_slope", "tail_index", "diverging"],
                );
                for (k, h) in horizons.iter().enumerate() {
                    let m = n_tau_moment(arrivals, &h.tau, h.p, n, derive_seed(seed, 12 + k as u64))?;
                    b.count(m.estimate.is_conclusive() || m.diverging);
                    table.push(vec![
                        h.tau.to_string(),
                        num(h.p),
                        num(m.estimate.mean),
                        num(m.estimate.stderr),
                        num(m.tau_moment.to_f64()),
                        num(m.growth_slope),
                        num(m.tail_index),
                        m.diverging.to_string(),
                    ]);
                }
                b.tables.push(table);
            }
        }
        Experiment::DependenceAudit {
            marginal,
            dependence,
            thresholds,
            moment_dimension,
        } => {
            let mut table = Table::new(
                "dependence_audit",
                &[
                    "check",
                    "side",
                    "n",
                    "lhs",
                    "rhs",
                    "coefficient",
                    "product",
                    "stderr",
                    "satisfied",
                    "matches_product",
                    "conclusive",
                ],
            );
            let mut push = |b: &mut Builder, check: &str, r: &InequalityReport| {
                b.count(r.conclusive);
                table.push(vec![
                    check.into(),
                    side_name(r.side).into(),
                    r.n.to_string(),
                    num(r.lhs),
                    num(r.rhs),
                    num(r.coefficient),
                    num(r.product),
                    num(r.mc_stderr),
                    r.satisfied.to_string(),
                    r.matches_product.to_string(),
                    r.conclusive.to_string(),
                ]);
            };
            for (k, side) in [Side::Upper, Side::Lower].into_iter().enumerate() {
                let r = verify_orthant_inequality(dependence, marginal, thresholds, side, n, derive_seed(seed, k as u64))?;
                push(&mut b, "orthant", &r);
            }
            let transforms = [Transform::Affine { a: 2.0, b: 1.0 }, Transform::NegateThenExp];
            for (k, t) in transforms.into_iter().enumerate() {
                for (j, side) in [Side::Upper, Side::Lower].into_iter().enumerate() {
                    let tag = 10 + 2 * k as u64 + j as u64;
                    let r = verify_monotone_transform(dependence, marginal, t, side, thresholds, n, derive_seed(seed, tag))?;
                    let name = match t {
                        Transform::Affine { .. } => "transform_affine",
                        Transform::NegateThenExp => "transform_negate_exp",
                    };
                    push(&mut b, &format!("{name}_from_{}", side_name(side)), &r.report);
                }
            }
            if marginal.support_min() >= 0.0 {
                let m = verify_product_moment(dependence, marginal, *moment_dimension, n, derive_seed(seed, 20))?;
                b.count(true);
                table.push(vec![
                    match m.truncated_at {
                        None => "product_moment".into(),
                        Some(c) => format!("product_moment_capped_at_{}", num(c)),
                    },
                    side_name(Side::Upper).into(),
                    m.n.to_string(),
                    num(m.lhs),
                    num(m.rhs),
                    num(m.coefficient),
                    num(m.rhs / m.coefficient),
                    num(m.mc_stderr),
                    m.satisfied.to_string(),
                    m.matches_product.to_string(),
                    "true".into(),
                ]);
            }
            let dims = thresholds.len();
            let ks = marginal_ks_distances(dependence, marginal, dims, n, derive_seed(seed, 21))?;
            let critical = 1.63 / (n as f64).sqrt();
            for (k, d) in ks.iter().enumerate() {
                b.count(true);
                table.push(vec![
                    format!("ks_coordinate_{}", k + 1),
                    String::new(),
                    n.to_string(),
                    num(*d),
                    num(critical),
                    String::new(),
                    String::new(),
                    String::new(),
                    (*d < critical).to_string(),
                    String::new(),
                    "true".into(),
                ]);
            }
            b.tables.push(table);
        }
        Experiment::TailDiagnostics { models } => {
            let mut classes = Table::new(
                "tail_classes",
                &[
                    "model",
                    "j_plus",
                    "j_minus",
                    "moment_index",
                    "in_c",
                    "in_d",
                    "in_s",
                    "in_s_star",
                    "insensitive",
                ],
            );
            let mut levels = Table::new(
                "tail_diagnostics",
                &["model", "x", "convolution_ratio", "sstar_ratio", "insensitivity"],
            );
            let mut stars = Table::new("tail_star_ratios", &["model", "proxy", "y", "grid_top", "value"]);
            let mut plot = LinePlot::new("tail_convolution_ratio", "P(X₁+X₂>x) / (2Ḡ(x))", "x", "ratio");
            for m in models {
                let d = class_diagnostics(m)?;
                let idx = m.indices();
                let label = m.to_string();
                b.count(true);
                classes.push(vec![
                    label.clone(),
                    num(idx.j_plus.to_f64()),
                    num(idx.j_minus.to_f64()),
                    num(idx.moment_index.to_f64()),
                    d.in_c.to_string(),
                    d.in_d.to_string(),
                    d.in_s.to_string(),
                    d.in_s_star.map(|v| v.to_string()).unwrap_or_default(),
                    d.insensitive.to_string(),
                ]);
                for (k, &x) in d.levels.iter().enumerate() {
                    levels.push(vec![
                        label.clone(),
                        num(x),
                        num(d.convolution_ratio[k]),
                        opt(d.sstar_ratio.as_ref().map(|v| v[k])),
                        num(d.insensitivity[k]),
                    ]);
                }
                let lo = 10.0 * m.support_min().max(1.0);
                for (y, v) in [1.5, 1.1, 1.01].iter().zip(&d.c_lower_star) {
                    stars.push(vec![label.clone(), "lower".into(), num(*y), num(lo * 1e4), num(*v)]);
                }
                for (k, v) in d.d_upper_star.iter().enumerate() {
                    stars.push(vec![label.clone(), "upper".into(), num(2.0), num(lo * 10f64.powi(k as i32 + 1)), num(*v)]);
                }
                plot.add(
                    label,
                    d.levels.iter().copied().zip(d.convolution_ratio.iter().copied()).collect(),
                );
            }
            b.tables.extend([classes, levels, stars]);
            b.plots.push(plot);
        }
    }
    Ok(b.finish())
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Upper => "upper",
        Side::Lower => "lower",
    }
}

fn deviation_tables(b: &mut Builder, name: &str, grid: &DeviationGrid) {
    let mut table = Table::new(name, &["n", "x", "p_hat", "stderr", "comparator", "ratio", "conclusive"]);
    let mut plot = LinePlot::new(&format!("{name}_ratio"), "P(S_n > x) / comparator", "x", "ratio");
    let mut series: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for c in &grid.cells {
        b.count(c.conclusive);
        table.push(vec![
            c.n.to_string(),
            num(c.x),
            num(c.probability.p_hat),
            num(c.probability.stderr),
            num(c.comparator),
            num(c.ratio),
            c.conclusive.to_string(),
        ]);
        match series.last_mut() {
            Some((n, pts)) if *n == c.n => pts.push((c.x, c.ratio)),
            _ => series.push((c.n, vec![(c.x, c.ratio)])),
        }
    }
    for (n, pts) in series {
        plot.add(format!("n = {n}"), pts);
    }
    let mut summary = Table::new(
        format!("{name}_summary"),
        &["n", "max_abs_deviation", "min_ratio", "max_ratio"],
    );
    for ((n, dev), (_, range)) in grid.max_deviation_by_n().into_iter().zip(grid.ratio_range_by_n()) {
        summary.push(vec![
            n.to_string(),
            opt(dev),
            opt(range.map(|r| r.0)),
            opt(range.map(|r| r.1)),
        ]);
    }
    b.tables.extend([table, summary]);
    b.plots.push(plot);
}
