use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kicktomo::config::RawConfig;
use kicktomo::{ConfigOverrides, Experiment, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(
    name = "kicktomo",
    version,
    about = "Kicked-top tomography simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV files and manifest.
    Run {
        /// fidelity_sweep, loschmidt, rel_entropy, otoc, bloch_perturb or perturb_sweep.
        #[arg(long, value_parser = parse_experiment)]
        experiment: Option<Experiment>,
        /// TOML config file; built-in defaults are used without one.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated kick strengths.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        lambda: Option<Vec<f64>>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file and print the resolved settings.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_experiment)]
        experiment: Option<Experiment>,
    },
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: RunError| e.to_string())
}

fn resolve(
    config: Option<PathBuf>,
    overrides: &ConfigOverrides,
) -> Result<ExperimentConfig, RunError> {
    match config {
        Some(path) => ExperimentConfig::load(&path, overrides),
        None => RawConfig::default().resolve(overrides),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            experiment,
            config,
            seed,
            lambda,
            out,
        } => {
            let overrides = ConfigOverrides {
                experiment,
                seed,
                lambda_list: lambda,
                output_dir: out,
            };
            resolve(config, &overrides).and_then(|cfg| {
                let manifest = kicktomo::run(&cfg)?;
                for file in &manifest.outputs {
                    println!("{}", cfg.output_dir.join(file).display());
                }
                if manifest.unconverged_projections > 0 {
                    eprintln!(
                        "warning: {} projections hit the iteration cap",
                        manifest.unconverged_projections
                    );
                }
                Ok(())
            })
        }
        Command::Validate { config, experiment } => {
            let overrides = ConfigOverrides {
                experiment,
                ..ConfigOverrides::default()
            };
            resolve(Some(config), &overrides).map(|cfg| {
                let text = serde_json::to_string_pretty(&cfg).expect("config serializes");
                println!("{text}");
                println!("config_hash = {}", cfg.hash());
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
