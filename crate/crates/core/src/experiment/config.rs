use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dependence::DependenceSpec;
use crate::error::{Error, Result};
use crate::estimate::Estimator;
use crate::renewal::{ArrivalModel, RandomHorizon};
use crate::ruin::{HorizonFunction, RiskModel};
use crate::tails::TailModel;

pub const SCHEMA_VERSION: u32 = 1;

/// One experiment run, as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    /// Paths, replicates or sample size, depending on the experiment.
    pub n_paths: u64,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    RuinFinite {
        model: RiskModel,
        x_grid: Vec<f64>,
        t_grid: Vec<f64>,
        #[serde(default)]
        estimator: Estimator,
    },
    RuinRandom {
        model: RiskModel,
        tau: RandomHorizon,
        x_grid: Vec<f64>,
    },
    UniformScan {
        model: RiskModel,
        horizon_function: HorizonFunction,
        x_grid: Vec<f64>,
        t_points_per_x: usize,
    },
    LdEnod {
        model: RiskModel,
        /// Defaults to `2·μ_G`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        n_grid: Vec<usize>,
    },
    LdWuod {
        model: RiskModel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        r: f64,
        n_grid: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probe: Option<ProbeSpec>,
    },
    RenewalMoments {
        arrivals: ArrivalModel,
        t_grid: Vec<f64>,
        q_grid: Vec<f64>,
        truncated: TruncatedSpec,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        horizons: Vec<HorizonMomentSpec>,
    },
    DependenceAudit {
        marginal: TailModel,
        dependence: DependenceSpec,
        /// Orthant thresholds; 2 to 6 entries.
        thresholds: Vec<f64>,
        moment_dimension: usize,
    },
    TailDiagnostics {
        models: Vec<TailModel>,
    },
}

/// Parameters of the tail-inequality probe run alongside `ld_wuod`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub v: f64,
    pub theta: f64,
    pub x_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedSpec {
    pub r: f64,
    pub delta: f64,
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonMomentSpec {
    pub tau: RandomHorizon,
    pub p: f64,
}

/// Name, summary and tested statement of each experiment kind.
pub const EXPERIMENTS: &[(&str, &str, &str)] = &[
    (
        "ruin_finite",
        "finite-time ruin probability against its one-big-jump approximant",
        "ψ(x;t) ∼ λ(t)·Ḡ(x) as x → ∞ for fixed t, with G ∈ C, bounded or o(n^(r−1)) claim coefficients and polynomial inter-arrival coefficients",
    ),
    (
        "ruin_random",
        "ruin probability at an independent random horizon",
        "ψ(x;τ) ∼ E N(τ)·Ḡ(x) when P(τ>x) = o(Ḡ(x)) and E τ < ∞",
    ),
    (
        "uniform_scan",
        "uniformity of the approximant over a growing horizon window",
        "sup over t ∈ (μ_H, x·g(x)] of |ψ(x;t)/(λ(t)Ḡ(x)) − 1| → 0 when ln x/(x g(x)) ↓ 0",
    ),
    (
        "ld_enod",
        "precise large deviations of ENOD claim sums",
        "P(S_n > x) ∼ n·Ḡ(x − nμ_G) uniformly for x ≥ γn, γ > μ_G",
    ),
    (
        "ld_wuod",
        "large-deviation sandwich for WUOD claim sums",
        "1 ≤ liminf P(S_n > x)/(nḠ(x)) and limsup ≤ Ḡ^*(v)/Ḡ_*((1 − μ_G/γ)^(−1)) uniformly for x ≥ γn, v = (r−1)/(J⁺+d−1)",
    ),
    (
        "renewal_moments",
        "moments of the quasi-renewal counting process",
        "E N^q(t) ∼ (t/μ_H)^q for q ≥ 1 and E e^(rN(t))·1{N(t) > (1+δ)t/μ_H} → 0",
    ),
    (
        "dependence_audit",
        "orthant, product-moment and monotone-transform checks of a dependence structure",
        "P(∩{ξ_i > x_i}) ≤ g_U(n)∏P(ξ_i > x_i), E∏ξ_i ≤ g_U(n)∏Eξ_i, monotone images inherit the coefficients",
    ),
    (
        "tail_diagnostics",
        "numerical class diagnostics for claim distributions",
        "C ⊂ S* ⊂ S for finite means, Pareto ∈ C, Exponential ∉ S, Lognormal ∉ D",
    ),
];

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::RuinFinite { .. } => "ruin_finite",
            Experiment::RuinRandom { .. } => "ruin_random",
            Experiment::UniformScan { .. } => "uniform_scan",
            Experiment::LdEnod { .. } => "ld_enod",
            Experiment::LdWuod { .. } => "ld_wuod",
            Experiment::RenewalMoments { .. } => "renewal_moments",
            Experiment::DependenceAudit { .. } => "dependence_audit",
            Experiment::TailDiagnostics { .. } => "tail_diagnostics",
        }
    }

    pub fn statement(&self) -> &'static str {
        let name = self.name();
        EXPERIMENTS.iter().find(|e| e.0 == name).map_or("", |e| e.2)
    }
}

impl ExperimentConfig {
    /// Parses JSON; syntax and schema errors carry the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(Error::Config {
                line: locate(text, "schema_version"),
                column: 1,
                message: format!(
                    "unsupported schema_version {}; expected {SCHEMA_VERSION}",
                    config.schema_version
                ),
            });
        }
        if config.n_paths == 0 {
            return Err(Error::Config {
                line: locate(text, "n_paths"),
                column: 1,
                message: "n_paths must be positive".into(),
            });
        }
        if config.workers == Some(0) {
            return Err(Error::Config {
                line: locate(text, "workers"),
                column: 1,
                message: "workers must be positive".into(),
            });
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

/// 1-based line of the first occurrence of `"key"`, or 1.
fn locate(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema_version": 1,
  "experiment": {
    "kind": "tail_diagnostics",
    "models": [{"family": "pareto", "alpha": 2.5, "xm": 1.0}]
  },
  "n_paths": 1000,
  "master_seed": 7,
  "output_dir": "out"
}"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.experiment.name(), "tail_diagnostics");
        assert_eq!(c.workers, None);
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn missing_seed_is_located() {
        let text = MINIMAL.replace("  \"master_seed\": 7,\n", "");
        match ExperimentConfig::from_json(&text) {
            Err(Error::Config { line, message, .. }) => {
                assert!(message.contains("master_seed"), "{message}");
                // Missing fields are reported at the closing brace of their object.
                assert_eq!(line, 9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_position() {
        let text = MINIMAL.replace("\"n_paths\": 1000,", "\"n_paths\": 1000,,");
        match ExperimentConfig::from_json(&text) {
            Err(Error::Config { line, column, .. }) => assert_eq!((line, column), (7, 19)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_versions_rejected() {
        let extra = MINIMAL.replace("\"n_paths\"", "\"n_path\": 3, \"n_paths\"");
        assert!(matches!(ExperimentConfig::from_json(&extra), Err(Error::Config { line: 7, .. })));
        let v2 = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(ExperimentConfig::from_json(&v2), Err(Error::Config { line: 2, .. })));
        let zero = MINIMAL.replace("1000", "0");
        assert!(matches!(ExperimentConfig::from_json(&zero), Err(Error::Config { line: 7, .. })));
    }

    #[test]
    fn every_kind_is_listed() {
        assert_eq!(EXPERIMENTS.len(), 8);
        assert!(EXPERIMENTS.iter().all(|e| !e.2.is_empty()));
    }
}
