//! Runs a JSON experiment configuration in-process and prints the tables,
//! as the `ruin-sim run` subcommand does.
//!
//! ```text
//! cargo run --release --example config_run -- crates/core/configs/tail_diagnostics.json
//! ```

use std::path::PathBuf;

use ruin_sim::experiment::{execute, ExperimentConfig, Outcome};

fn main() -> ruin_sim::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/tail_diagnostics.json")
    });
    let config = ExperimentConfig::load(&path)?;
    println!("{}: {}", config.experiment.name(), config.experiment.statement());
    match execute(&config, None)? {
        Outcome::GateFailure(violations) => {
            for v in violations {
                println!("hypothesis violated: {v}");
            }
        }
        Outcome::Completed(bundle) => {
            for table in &bundle.tables {
                println!("\n== {} ==\n{}", table.name, String::from_utf8_lossy(&table.to_csv()?));
            }
            println!("{} of {} cells conclusive", bundle.conclusive_cells, bundle.total_cells);
        }
    }
    Ok(())
}
