use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use retrodictor::scenario::{
    self, has_strict_violation, render_table, OracleCheckConfig, ScenarioError,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_STRICT: u8 = 3;
const EXIT_PROPERTY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "retrodictor",
    version,
    about = "Probabilities of sequences of projective quantum measurements, \
             with every retrodiction formula cross-checked against a \
             brute-force oracle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario file and print one result row per query.
    Run {
        file: PathBuf,
        /// Write the result records to this path as JSON.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Exit nonzero if any result is undefined or deviates from the
        /// oracle by more than 1e-9.
        #[arg(long)]
        strict: bool,
    },
    /// Print a built-in demonstration: margenau, three-box, or rotated.
    Demo { name: String },
    /// Cross-check every closed form against the brute-force oracle on
    /// random instances.
    OracleCheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        #[arg(long = "max-dim", default_value_t = 4)]
        max_dim: usize,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn dispatch() -> Result<ExitCode, ScenarioError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, json, strict } => {
            let records = scenario::run_scenario(&file)?;
            print!("{}", render_table(&records));
            if let Some(path) = json {
                let text =
                    serde_json::to_string_pretty(&records).expect("records serialize cleanly");
                std::fs::write(&path, text + "\n").map_err(|e| ScenarioError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
            }
            if strict && has_strict_violation(&records) {
                eprintln!("strict: at least one result is undefined or deviates from the oracle");
                return Ok(ExitCode::from(EXIT_STRICT));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Demo { name } => {
            let text = scenario::demo(&name)?;
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck {
            seed,
            trials,
            max_dim,
        } => {
            let summary = scenario::oracle_check(&OracleCheckConfig {
                seed,
                trials,
                max_dim,
            })?;
            println!(
                "seed {}  trials {}  max-dim {}",
                summary.seed, summary.trials, summary.max_dim
            );
            println!(
                "checks {}  failures {}  worst deviation {:.3e}",
                summary.checks, summary.failures, summary.worst_deviation
            );
            if let Some(failure) = summary.failure {
                let path = PathBuf::from("oracle-check-failure.json");
                let text = serde_json::to_string_pretty(&failure.scenario)
                    .expect("scenario serializes cleanly");
                std::fs::write(&path, text + "\n").map_err(|e| ScenarioError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                eprintln!("property failure: {}", failure.description);
                eprintln!("offending instance written to {}", path.display());
                return Ok(ExitCode::from(EXIT_PROPERTY));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
