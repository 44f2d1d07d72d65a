use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vmsdg_core::runner::{exit_code, list_experiments, run_experiment, ExperimentConfig, ExperimentId};
use vmsdg_core::{Error, Result};

#[derive(Parser)]
#[command(name = "vmsdg", version, about = "Discontinuous Galerkin methods as variational multiscale methods")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// List the experiments.
    List,
    /// Run a preset experiment.
    Run {
        /// Experiment id, E1 to E10 or custom.
        #[arg(long)]
        experiment: ExperimentId,
        /// Directory for solution.csv and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace one config field, as key=value with a JSON value.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a JSON configuration file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn preset_with(id: ExperimentId, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::preset(id);
    for o in overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn from_file(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn execute(cfg: Result<ExperimentConfig>, out: Option<&Path>) -> i32 {
    let result = cfg.and_then(|cfg| {
        let outcome = run_experiment(&cfg)?;
        if let Some(dir) = out {
            outcome.write_artifacts(dir)?;
        }
        Ok(outcome)
    });
    match &result {
        Ok(o) => {
            print!("{}", o.summary());
            for n in &o.notes {
                println!("note: {n}");
            }
            println!("{}: {}", o.experiment, if o.passed() { "all checks passed" } else { "checks failed" });
        }
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&result)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Commands::List => {
            print!("{}", list_experiments());
            0
        }
        Commands::Run { experiment, out, overrides } => execute(preset_with(experiment, &overrides), out.as_deref()),
        Commands::Solve { config, out } => execute(from_file(&config), Some(&out)),
    };
    ExitCode::from(code as u8)
}
