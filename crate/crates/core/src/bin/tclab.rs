use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tclab::harness::{run_config, run_file, Experiment, ExperimentConfig, RunError, RunOptions, RunReport};

#[derive(Parser)]
#[command(name = "tclab", version, about = "Time-changed Lévy process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides $TCLAB_OUT and the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one CIR rate path and its integrated clock.
    Figure1 {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        sigma_v: Option<f64>,
        #[arg(long)]
        v0: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
}

fn report(result: Result<RunReport, RunError>) -> ExitCode {
    match result {
        Ok(r) => {
            println!("{}", r.summary);
            for c in r.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {} {}", c.name, c.detail);
            }
            println!("wrote {} file(s) to {}", r.files.len(), r.output_dir.display());
            ExitCode::from(r.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("tclab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, out } => report(run_file(&config, &RunOptions { seed, out })),
        Command::Figure1 {
            seed,
            out,
            kappa,
            theta,
            sigma_v,
            v0,
            horizon,
            step,
        } => {
            let mut config = ExperimentConfig::new(Experiment::Figure1);
            let f = &mut config.figure1;
            f.cir.kappa = kappa.unwrap_or(f.cir.kappa);
            f.cir.theta = theta.unwrap_or(f.cir.theta);
            f.cir.sigma_v = sigma_v.unwrap_or(f.cir.sigma_v);
            f.cir.v0 = v0.unwrap_or(f.cir.v0);
            f.horizon = horizon.unwrap_or(f.horizon);
            f.step = step.unwrap_or(f.step);
            report(run_config(config, &RunOptions { seed, out }))
        }
    }
}
