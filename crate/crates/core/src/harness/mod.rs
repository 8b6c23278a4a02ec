//! Reproducible experiment runner behind the `tclab` binary.
//!
//! A run parses and validates the whole configuration, executes one
//! experiment in memory, and only then moves its files into the output
//! directory. Identical configuration and seed give byte-identical files.

mod config;
mod experiments;

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Error;

pub use config::{
    ClockMeanConfig, ConfigError, Experiment, ExperimentConfig, Figure1Config, MeasurabilityConfig,
    PriceCompareConfig, EXPERIMENTS,
};
pub use experiments::{
    run_arbitrage, run_clock_mean, run_figure1, run_measurability, run_price_compare, simulate_figure1, Check,
    Figure1Run, Outputs,
};

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "TCLAB_OUT";
pub const DEFAULT_OUT: &str = "tclab-out";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Highest-priority output directory (the `--out` flag).
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(Error),
    #[error("experiment failed: {0}")]
    Failed(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Invalid(_) | RunError::Failed(_) => 1,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Usage(msg) => RunError::Usage(msg),
            ConfigError::Invalid(e) => RunError::Invalid(e),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub experiment: Experiment,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every attached check passed, otherwise 1.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// `--out`, then `$TCLAB_OUT`, then `output_dir` from the config, then
/// `tclab-out`.
pub fn resolve_output_dir(cli: Option<&Path>, configured: Option<&Path>) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|p| !p.is_empty()) {
        return PathBuf::from(p);
    }
    configured.map_or_else(|| PathBuf::from(DEFAULT_OUT), Path::to_path_buf)
}

/// Runs the selected experiment without touching the filesystem.
pub fn execute(config: &ExperimentConfig) -> crate::error::Result<Outputs> {
    config.validate()?;
    let seed = config.seed;
    match config.experiment {
        Experiment::Figure1 => run_figure1(&config.figure1, seed),
        Experiment::Arbitrage => run_arbitrage(&config.arbitrage, seed),
        Experiment::Measurability => run_measurability(&config.measurability, seed),
        Experiment::PriceCompare => run_price_compare(&config.price_compare, seed),
        Experiment::ClockMean => run_clock_mean(&config.clock_mean, seed),
    }
}

/// Writes `outputs` into a temporary directory next to `dir`, then renames
/// each file into `dir`. Nothing lands in `dir` if any write fails.
pub fn commit(outputs: &Outputs, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let staging = tempfile::Builder::new().prefix(".tclab-staging-").tempdir_in(&parent)?;
    for (name, bytes) in &outputs.files {
        fs::write(staging.path().join(name), bytes)?;
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(outputs.files.len());
    for (name, _) in &outputs.files {
        let target = dir.join(name);
        fs::rename(staging.path().join(name), &target)?;
        written.push(target);
    }
    Ok(written)
}

pub fn run_config(mut config: ExperimentConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    config.validate().map_err(RunError::Invalid)?;
    let dir = resolve_output_dir(opts.out.as_deref(), config.output_dir.as_deref());
    let outputs = execute(&config).map_err(RunError::Failed)?;
    let files = commit(&outputs, &dir).map_err(|e| RunError::Failed(Error::Io(e)))?;
    Ok(RunReport {
        experiment: config.experiment,
        output_dir: dir,
        files,
        summary: outputs.summary.clone(),
        checks: outputs.checks.clone(),
    })
}

/// Reads, validates and runs a TOML configuration file.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunReport, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let config = ExperimentConfig::from_toml(&text)?;
    run_config(config, opts)
}
