use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ruin_sim::experiment::{check, run_to_dir, ExperimentConfig, Outcome, EXPERIMENTS};

const EXIT_MALFORMED: u8 = 1;
const EXIT_GATE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(version, about = "Ruin probability experiments for dependent renewal risk models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check hypotheses, simulate and write the report bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; overrides the config file.
        #[arg(long, env = "RUIN_SIM_WORKERS")]
        workers: Option<usize>,
        /// Also write SVG plots.
        #[arg(long)]
        plots: bool,
        /// Output directory; overrides the config file.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check a configuration without simulating.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the available experiment kinds.
    ListExperiments,
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::load(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        ExitCode::from(EXIT_MALFORMED)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for (name, summary, statement) in EXPERIMENTS {
                println!("{name:<18} {summary}\n{:<18} tests: {statement}", "");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match check(&cfg) {
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    ExitCode::from(EXIT_MALFORMED)
                }
                Ok(v) if v.is_empty() => ExitCode::SUCCESS,
                Ok(v) => {
                    for violation in v {
                        println!("{violation}");
                    }
                    ExitCode::from(EXIT_GATE)
                }
            }
        }
        Command::Run {
            config,
            workers,
            plots,
            output_dir,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if workers == Some(0) {
                eprintln!("--workers must be positive");
                return ExitCode::from(EXIT_MALFORMED);
            }
            let dir = output_dir.unwrap_or_else(|| cfg.output_dir.clone());
            match run_to_dir(&cfg, &dir, workers.or(cfg.workers), plots) {
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    ExitCode::from(EXIT_MALFORMED)
                }
                Ok((Outcome::GateFailure(v), _)) => {
                    for violation in v {
                        eprintln!("{violation}");
                    }
                    ExitCode::from(EXIT_GATE)
                }
                Ok((Outcome::Completed(bundle), written)) => {
                    for path in &written {
                        println!("{}", path.display());
                    }
                    println!(
                        "{} of {} cells conclusive",
                        bundle.conclusive_cells, bundle.total_cells
                    );
                    if bundle.inconclusive_dominated() {
                        ExitCode::from(EXIT_INCONCLUSIVE)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
            }
        }
    }
}
