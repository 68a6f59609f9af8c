//! `rhf-lab`: run, validate and list experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rhf_lab::config::{ExperimentConfig, EXPERIMENTS};
use rhf_lab::experiments::{error_record, run_experiment, write_error_record};
use rhf_lab::LabError;

#[derive(Parser)]
#[command(name = "rhf-lab", version, about = "Reduced Hartree-Fock crystal experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Override a key by dotted path, e.g. `--set model.cells=16`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        #[command(flatten)]
        args: ConfigArgs,
        /// Root for relative output directories.
        #[arg(long, env = "RHF_LAB_OUTPUT_ROOT")]
        output_root: Option<PathBuf>,
    },
    /// Parse and validate a configuration without running it.
    Validate {
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// List the available experiment kinds.
    ListExperiments,
}

fn fail(err: &LabError) -> ExitCode {
    eprintln!("{}", error_record(err));
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::ListExperiments => {
            for (name, description) in EXPERIMENTS {
                println!("{name:<14} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { args } => match ExperimentConfig::load(&args.config, &args.overrides) {
            Ok(cfg) => {
                println!("ok: {} experiment", cfg.experiment.name());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Run { args, output_root } => {
            let cfg = match ExperimentConfig::load(&args.config, &args.overrides) {
                Ok(cfg) => cfg,
                Err(e) => return fail(&e),
            };
            let dir = cfg.output_dir(output_root.as_deref());
            match run_experiment(&cfg, &dir) {
                Ok(outcome) => {
                    println!("{}", outcome.directory.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    if let Err(w) = write_error_record(&dir, &e) {
                        eprintln!("could not write error record: {w}");
                    }
                    fail(&e)
                }
            }
        }
    }
}
