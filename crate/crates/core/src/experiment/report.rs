use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Serialize;

use crate::error::{Error, HypothesisViolation, Result};

use super::config::ExperimentConfig;
use super::plot::LinePlot;

/// A result table with a frozen column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem; the CSV is written to `<stem>.csv`.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }

    /// Values of one column, parsed back to numbers; blanks are skipped.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.columns.iter().position(|c| *c == name) else {
            return Vec::new();
        };
        self.rows.iter().filter_map(|r| r[i].parse().ok()).collect()
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Everything an experiment produced, before it is written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub tables: Vec<Table>,
    pub plots: Vec<LinePlot>,
    pub violations: Vec<HypothesisViolation>,
    pub conclusive_cells: usize,
    pub total_cells: usize,
}

impl ReportBundle {
    pub fn conclusive_fraction(&self) -> f64 {
        if self.total_cells == 0 {
            1.0
        } else {
            self.conclusive_cells as f64 / self.total_cells as f64
        }
    }

    /// More than half of the cells lack enough events.
    pub fn inconclusive_dominated(&self) -> bool {
        self.conclusive_fraction() < 0.5
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    statement: &'a str,
    version: String,
    timestamp: String,
    config: &'a ExperimentConfig,
    outputs: Vec<String>,
    conclusive_cells: usize,
    total_cells: usize,
    violations: Vec<String>,
}

/// Writes one CSV per table, optional SVG plots and `manifest.json`.
/// Returns the paths written.
pub fn write_bundle(dir: &Path, config: &ExperimentConfig, bundle: &ReportBundle, plots: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in &bundle.tables {
        let path = dir.join(format!("{}.csv", t.name));
        std::fs::write(&path, t.to_csv()?)?;
        written.push(path);
    }
    if plots {
        for p in &bundle.plots {
            let path = dir.join(format!("{}.svg", p.name));
            std::fs::write(&path, p.to_svg())?;
            written.push(path);
        }
    }
    let manifest = Manifest {
        experiment: config.experiment.name(),
        statement: config.experiment.statement(),
        version: describe_version(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config,
        outputs: written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
        conclusive_cells: bundle.conclusive_cells,
        total_cells: bundle.total_cells,
        violations: bundle.violations.iter().map(ToString::to_string).collect(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(&path, text + "\n")?;
    written.push(path);
    Ok(written)
}

/// `git describe` of the working tree, or the crate version outside git.
fn describe_version() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}
