//! Configured experiment runs with CSV reports.
//!
//! A run reads an [`ExperimentConfig`], checks the hypotheses of the result
//! it exercises, simulates, and writes one CSV per table plus a manifest.
//! CSV bytes depend only on the configuration, never on the worker count.

mod config;
mod gates;
mod plot;
mod report;
mod run;

use std::path::{Path, PathBuf};

pub use config::{
    Experiment, ExperimentConfig, HorizonMomentSpec, ProbeSpec, TruncatedSpec, EXPERIMENTS, SCHEMA_VERSION,
};
pub use gates::{check, resolve_gamma};
pub use plot::{LinePlot, Series};
pub use report::{num, write_bundle, ReportBundle, Table};

use crate::error::{HypothesisViolation, Result};
use crate::stream::with_workers;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Hypotheses failed; nothing was simulated.
    GateFailure(Vec<HypothesisViolation>),
    Completed(ReportBundle),
}

/// Gates, then simulation on `workers` threads (the global pool when `None`).
pub fn execute(config: &ExperimentConfig, workers: Option<usize>) -> Result<Outcome> {
    let violations = check(config)?;
    if !violations.is_empty() {
        return Ok(Outcome::GateFailure(violations));
    }
    let bundle = with_workers(workers, || run::simulate(config))??;
    Ok(Outcome::Completed(bundle))
}

/// [`execute`] followed by [`write_bundle`] into `dir` on success.
pub fn run_to_dir(
    config: &ExperimentConfig,
    dir: &Path,
    workers: Option<usize>,
    plots: bool,
) -> Result<(Outcome, Vec<PathBuf>)> {
    let outcome = execute(config, workers)?;
    let written = match &outcome {
        Outcome::Completed(bundle) => write_bundle(dir, config, bundle, plots)?,
        Outcome::GateFailure(_) => Vec::new(),
    };
    Ok((outcome, written))
}
