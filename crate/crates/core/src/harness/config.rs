use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{ArbitrageConfig, Drift, DriftName, MeasurabilityOptions};
use crate::levy::LevyParams;
use crate::pricing::{OptionSpec, PricingConfig, PricingModel};
use crate::time_change::{CirParams, RateModel, DEFAULT_STEP};

/// Experiments the runner knows, by their config name.
pub const EXPERIMENTS: [&str; 5] = ["figure1", "arbitrage", "measurability", "price-compare", "clock-mean"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Figure1,
    Arbitrage,
    Measurability,
    PriceCompare,
    ClockMean,
}

impl Experiment {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "figure1" => Experiment::Figure1,
            "arbitrage" => Experiment::Arbitrage,
            "measurability" => Experiment::Measurability,
            "price-compare" => Experiment::PriceCompare,
            "clock-mean" => Experiment::ClockMean,
            _ => return None,
        })
    }
}

fn config_err(field: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        Error::Domain { name, reason } => Error::Config {
            field: format!("{field}.{name}"),
            reason,
        },
        other => Error::Config {
            field: field.to_string(),
            reason: other.to_string(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Figure1Config {
    pub cir: CirParams,
    pub horizon: f64,
    pub step: f64,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Self {
            cir: CirParams::default(),
            horizon: 2.0,
            step: DEFAULT_STEP,
        }
    }
}

impl Figure1Config {
    pub fn validate(&self) -> Result<()> {
        self.cir.validate().map_err(|e| config_err("figure1.cir", e))?;
        positive("figure1.horizon", self.horizon)?;
        positive("figure1.step", self.step)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurabilityConfig {
    pub rate_model: RateModel,
    /// Conditioning times; each is tested on `n_states` independent histories.
    pub times: Vec<f64>,
    pub n_states: usize,
    pub n_continuations: usize,
    pub step: f64,
    pub max_continuation: f64,
}

impl Default for MeasurabilityConfig {
    fn default() -> Self {
        let opts = MeasurabilityOptions::default();
        Self {
            rate_model: RateModel::Cir(CirParams::default()),
            times: vec![1.0],
            n_states: 20,
            n_continuations: 256,
            step: opts.step,
            max_continuation: opts.max_continuation,
        }
    }
}

impl MeasurabilityConfig {
    pub fn options(&self) -> MeasurabilityOptions {
        MeasurabilityOptions {
            step: self.step,
            max_continuation: self.max_continuation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rate_model
            .validate()
            .map_err(|e| config_err("measurability.rate_model", e))?;
        if self.times.is_empty() {
            return Err(field("measurability.times", "must not be empty"));
        }
        for &t in &self.times {
            positive("measurability.times", t)?;
        }
        if self.n_states == 0 {
            return Err(field("measurability.n_states", "must be >= 1"));
        }
        if self.n_continuations < 2 {
            return Err(field("measurability.n_continuations", "must be >= 2"));
        }
        positive("measurability.step", self.step)?;
        positive("measurability.max_continuation", self.max_continuation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriceCompareConfig {
    pub sigma: f64,
    pub rho: f64,
    pub drift: Drift,
    pub rate_model: RateModel,
    pub pricing: PricingConfig,
    pub options: Vec<OptionSpec>,
}

impl Default for PriceCompareConfig {
    fn default() -> Self {
        let mut options = Vec::new();
        for maturity in [0.5, 1.0, 2.0] {
            for strike in [0.8, 1.0, 1.2] {
                options.push(OptionSpec::call(strike, maturity, 1.0));
            }
        }
        Self {
            sigma: 0.3,
            rho: 0.0,
            drift: Drift::Named(DriftName::Martingale),
            rate_model: RateModel::Cir(CirParams::default()),
            pricing: PricingConfig::default(),
            options,
        }
    }
}

impl PriceCompareConfig {
    pub fn model(&self) -> Result<PricingModel> {
        let mu = self.drift.resolve(self.sigma)?;
        Ok(PricingModel::new(LevyParams::new(mu, self.sigma, self.rho)?, self.rate_model))
    }

    pub fn validate(&self) -> Result<()> {
        self.model()
            .and_then(|m| m.validate())
            .map_err(|e| config_err("price-compare", e))?;
        self.pricing
            .validate()
            .map_err(|e| config_err("price-compare.pricing", e))?;
        for (i, o) in self.options.iter().enumerate() {
            o.validate().map_err(|e| config_err(&format!("price-compare.options[{i}]"), e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClockMeanConfig {
    pub rate_model: RateModel,
    pub times: Vec<f64>,
    pub n_paths: u64,
    pub step: f64,
}

impl Default for ClockMeanConfig {
    fn default() -> Self {
        Self {
            rate_model: RateModel::Cir(CirParams::default()),
            times: vec![0.5, 1.0, 2.0],
            n_paths: 100_000,
            step: DEFAULT_STEP,
        }
    }
}

impl ClockMeanConfig {
    pub fn validate(&self) -> Result<()> {
        self.rate_model
            .validate()
            .map_err(|e| config_err("clock-mean.rate_model", e))?;
        if self.times.is_empty() {
            return Err(field("clock-mean.times", "must not be empty"));
        }
        for &t in &self.times {
            positive("clock-mean.times", t)?;
        }
        if self.n_paths < 2 {
            return Err(field("clock-mean.n_paths", "must be >= 2"));
        }
        positive("clock-mean.step", self.step)
    }
}

fn default_arbitrage() -> ArbitrageConfig {
    ArbitrageConfig::new(1000)
}

/// A parsed configuration file.
///
/// ```toml
/// experiment = "arbitrage"
/// seed = 7
/// output_dir = "out"
///
/// [arbitrage]
/// n_scenarios = 2000
/// rho_grid = [0.0, 1.0]
/// drift = "martingale"
/// rate_model = { model = "exp-bm" }
/// ```
///
/// Only the table of the selected experiment is used; missing tables and
/// fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub figure1: Figure1Config,
    #[serde(default = "default_arbitrage")]
    pub arbitrage: ArbitrageConfig,
    #[serde(default)]
    pub measurability: MeasurabilityConfig,
    #[serde(default, rename = "price-compare")]
    pub price_compare: PriceCompareConfig,
    #[serde(default, rename = "clock-mean")]
    pub clock_mean: ClockMeanConfig,
}

/// Why a configuration was rejected.
#[derive(Debug)]
pub enum ConfigError {
    /// Missing or unknown experiment name.
    Usage(String),
    /// Well-named experiment with an unparsable or invalid field.
    Invalid(Error),
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            seed: 0,
            output_dir: None,
            figure1: Figure1Config::default(),
            arbitrage: default_arbitrage(),
            measurability: MeasurabilityConfig::default(),
            price_compare: PriceCompareConfig::default(),
            clock_mean: ClockMeanConfig::default(),
        }
    }

    /// Parses and fully validates a TOML document.
    pub fn from_toml(text: &str) -> std::result::Result<Self, ConfigError> {
        let value: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            ConfigError::Invalid(Error::Config {
                field: "<document>".into(),
                reason: e.message().to_string(),
            })
        })?;
        match value.get("experiment").and_then(|v| v.as_str()) {
            Some(name) if Experiment::parse(name).is_some() => {}
            Some(name) => {
                return Err(ConfigError::Usage(format!(
                    "unknown experiment {name:?}; expected one of {}",
                    EXPERIMENTS.join(", ")
                )))
            }
            None => return Err(ConfigError::Usage("missing string field `experiment`".into())),
        }
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
            ConfigError::Invalid(Error::Config {
                field: describe_span(text, &e),
                reason: e.message().to_string(),
            })
        })?;
        config.validate().map_err(ConfigError::Invalid)?;
        Ok(config)
    }

    /// Validates the section of the selected experiment.
    pub fn validate(&self) -> Result<()> {
        match self.experiment {
            Experiment::Figure1 => self.figure1.validate(),
            Experiment::Arbitrage => self.arbitrage.validate().map_err(|e| match e {
                Error::Config { field, reason } => Error::Config {
                    field: format!("arbitrage.{field}"),
                    reason,
                },
                other => config_err("arbitrage", other),
            }),
            Experiment::Measurability => self.measurability.validate(),
            Experiment::PriceCompare => self.price_compare.validate(),
            Experiment::ClockMean => self.clock_mean.validate(),
        }
    }
}

fn describe_span(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start].matches('\n').count() + 1;
            let snippet = text[span].lines().next().unwrap_or("").trim();
            format!("line {line}: {snippet}")
        }
        None => "<document>".into(),
    }
}

fn field(name: &str, reason: &str) -> Error {
    Error::Config {
        field: name.into(),
        reason: reason.into(),
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Config {
            field: name.into(),
            reason: format!("must be finite and > 0, got {x}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn invalid_field(text: &str) -> String {
        match ExperimentConfig::from_toml(text) {
            Err(ConfigError::Invalid(Error::Config { field, .. })) => field,
            other => panic!("expected invalid config, got {other:?}"),
        }
    }

    #[test]
    fn minimal_configs_parse_with_defaults() {
        for name in EXPERIMENTS {
            let c = ExperimentConfig::from_toml(&format!("experiment = \"{name}\"\nseed = 3\n")).unwrap();
            assert_eq!(c.seed, 3);
        }
        let c = ExperimentConfig::from_toml("experiment = \"figure1\"").unwrap();
        assert_eq!(c.figure1, Figure1Config::default());
    }

    #[test]
    fn nested_fields_parse() {
        let text = r#"
experiment = "arbitrage"
[arbitrage]
n_scenarios = 50
rho_grid = [1.0]
drift = "martingale"
rate_model = { model = "cir", kappa = 2.0, theta = 1.0, sigma_v = 0.3, v0 = 1.0 }
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.arbitrage.n_scenarios, 50);
        assert_eq!(c.arbitrage.drift, Drift::Named(DriftName::Martingale));
        assert!(matches!(c.arbitrage.rate_model, RateModel::Cir(p) if p.kappa == 2.0));

        let text = r#"
experiment = "price-compare"
[price-compare]
options = [{ strike = 1.0, maturity = 0.5, kind = "put", spot = 1.0 }]
[price-compare.pricing]
mc_paths = 1000
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.price_compare.options.len(), 1);
        assert_eq!(c.price_compare.pricing.mc_paths, 1000);
        assert_eq!(c.price_compare.pricing.n_quad, 4096);
    }

    #[test]
    fn unknown_or_missing_experiment_is_usage() {
        assert!(matches!(
            ExperimentConfig::from_toml("experiment = \"figure2\""),
            Err(ConfigError::Usage(_))
        ));
        assert!(matches!(ExperimentConfig::from_toml("seed = 1"), Err(ConfigError::Usage(_))));
    }

    #[test]
    fn invalid_fields_are_named() {
        assert_eq!(
            invalid_field("experiment = \"figure1\"\n[figure1.cir]\nkappa = -1.0\n"),
            "figure1.cir.kappa"
        );
        assert_eq!(
            invalid_field("experiment = \"arbitrage\"\n[arbitrage]\nn_scenarios = 0\n"),
            "arbitrage.n_scenarios"
        );
        assert_eq!(
            invalid_field("experiment = \"clock-mean\"\n[clock-mean]\ntimes = [1.0, -2.0]\n"),
            "clock-mean.times"
        );
        assert!(invalid_field("experiment = \"figure1\"\n[figure1]\nhorizn = 2.0\n").starts_with("line 3"));
        assert_eq!(invalid_field("experiment = \"figure1\"\nseed = "), "<document>");
    }
}
