use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::fmt_num;
use crate::grid::PathGrid;
use crate::levy::{martingale_drift, LevyParams};
use crate::scenario::{build_scenario, ScenarioSpec};
use crate::seed::Seed;
use crate::stats::Welford;
use crate::time_change::RateModel;

use super::strategy::{default_check_times, lookahead_strategy, natural_strategy, StrategyLedger};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftName {
    Martingale,
}

/// Drift of `X`: a number, or `"martingale"` for `-sigma^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Drift {
    Value(f64),
    Named(DriftName),
}

impl Default for Drift {
    fn default() -> Self {
        Drift::Value(0.0)
    }
}

impl Drift {
    pub fn resolve(self, sigma: f64) -> Result<f64> {
        match self {
            Drift::Value(mu) => Ok(mu),
            Drift::Named(DriftName::Martingale) => martingale_drift(sigma),
        }
    }
}

fn default_rho_grid() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArbitrageConfig {
    #[serde(default = "ArbitrageConfig::default_model")]
    pub rate_model: RateModel,
    #[serde(default = "ArbitrageConfig::default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub drift: Drift,
    #[serde(default = "default_rho_grid")]
    pub rho_grid: Vec<f64>,
    #[serde(default = "ArbitrageConfig::default_n_scenarios")]
    pub n_scenarios: usize,
    #[serde(default = "ArbitrageConfig::default_horizon")]
    pub horizon: f64,
    #[serde(default = "ArbitrageConfig::default_hold")]
    pub hold: f64,
    /// Defaults to the integers `0..=horizon - hold`.
    #[serde(default)]
    pub check_times: Option<Vec<f64>>,
    #[serde(default = "ArbitrageConfig::default_step")]
    pub step: f64,
    #[serde(default = "ArbitrageConfig::default_refinement")]
    pub refinement: usize,
    #[serde(default = "ArbitrageConfig::default_s0")]
    pub s0: f64,
}

impl ArbitrageConfig {
    fn default_model() -> RateModel {
        RateModel::ExpBm
    }
    fn default_n_scenarios() -> usize {
        1000
    }
    fn default_sigma() -> f64 {
        1.0
    }
    fn default_horizon() -> f64 {
        10.0
    }
    fn default_hold() -> f64 {
        1.0
    }
    fn default_step() -> f64 {
        1.0 / 128.0
    }
    fn default_refinement() -> usize {
        2
    }
    fn default_s0() -> f64 {
        1.0
    }

    pub fn new(n_scenarios: usize) -> Self {
        Self {
            rate_model: Self::default_model(),
            sigma: Self::default_sigma(),
            drift: Drift::default(),
            rho_grid: default_rho_grid(),
            n_scenarios,
            horizon: Self::default_horizon(),
            hold: Self::default_hold(),
            check_times: None,
            step: Self::default_step(),
            refinement: Self::default_refinement(),
            s0: Self::default_s0(),
        }
    }

    pub fn check_times(&self) -> Vec<f64> {
        self.check_times
            .clone()
            .unwrap_or_else(|| default_check_times(self.horizon, self.hold))
    }

    fn spec(&self, rho: f64) -> Result<ScenarioSpec> {
        let mu = self.drift.resolve(self.sigma)?;
        let levy = LevyParams::new(mu, self.sigma, rho)?;
        let grid = PathGrid::with_max_step(self.horizon, self.step)?;
        Ok(ScenarioSpec::new(levy, self.rate_model, grid, self.s0).with_refinement(self.refinement))
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, reason: String| Error::Config {
            field: name.to_string(),
            reason,
        };
        if self.n_scenarios == 0 {
            return Err(field("n_scenarios", "must be >= 1".into()));
        }
        if self.rho_grid.is_empty() {
            return Err(field("rho_grid", "must not be empty".into()));
        }
        if !(self.hold.is_finite() && self.hold > 0.0) {
            return Err(field("hold", format!("must be > 0, got {}", self.hold)));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.hold) {
            return Err(field("horizon", format!("must be >= hold, got {}", self.horizon)));
        }
        if let Some(times) = &self.check_times {
            if let Some(bad) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                return Err(field("check_times", format!("entries must be >= 0, got {bad}")));
            }
        }
        for &rho in &self.rho_grid {
            self.spec(rho)
                .and_then(|s| s.validate())
                .map_err(|e| field("rho_grid", e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    /// Mean of per-scenario total pnl.
    pub mean_pnl: f64,
    pub se: f64,
    pub t_stat: Option<f64>,
    pub n_trades: usize,
    pub n_opportunities: usize,
    pub n_skipped: usize,
    pub min_trade_pnl: Option<f64>,
    pub violations: u64,
}

impl ArmSummary {
    fn from_ledgers(ledgers: &[StrategyLedger]) -> Self {
        let totals: Welford = ledgers.iter().map(|l| l.total_pnl).collect();
        let se = totals.std_error();
        let mean_pnl = totals.mean();
        let trades = || ledgers.iter().flat_map(|l| &l.trades);
        Self {
            mean_pnl,
            se,
            t_stat: (se > 0.0).then(|| mean_pnl / se),
            n_trades: trades().count(),
            n_opportunities: ledgers.iter().map(|l| l.n_opportunities).sum(),
            n_skipped: ledgers.iter().map(|l| l.n_skipped).sum(),
            min_trade_pnl: trades().map(|t| t.pnl).reduce(f64::min),
            violations: ledgers.iter().map(|l| l.audit.violations).sum(),
        }
    }

    /// Mean within `n_se` standard errors of zero (exactly zero when `se = 0`).
    pub fn mean_within(&self, n_se: f64) -> bool {
        self.mean_pnl.abs() <= n_se * self.se
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoReport {
    pub rho: f64,
    pub mu: f64,
    /// `rho = 1` and `hold = 1`; other settings apply the rule beyond its
    /// original construction.
    pub exact_construction: bool,
    pub lookahead: ArmSummary,
    pub natural: ArmSummary,
    /// Scenarios where lookahead total pnl is below the natural arm's pnl on
    /// the same entry times.
    pub dominance_failures: usize,
    #[serde(skip)]
    pub lookahead_ledgers: Vec<StrategyLedger>,
    #[serde(skip)]
    pub natural_ledgers: Vec<StrategyLedger>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArbitrageReport {
    pub config: ArbitrageConfig,
    pub seed: Seed,
    pub results: Vec<RhoReport>,
}

impl ArbitrageReport {
    pub fn for_rho(&self, rho: f64) -> Option<&RhoReport> {
        self.results.iter().find(|r| r.rho == rho)
    }
}

/// Runs both arms for every `rho` in the grid. Scenario `i` uses seed stream
/// `i` for every `rho`, so the arms and the `rho` values are matched.
pub fn run_arbitrage_experiment(config: &ArbitrageConfig, seed: Seed) -> Result<ArbitrageReport> {
    config.validate()?;
    let times = config.check_times();
    let mut results = Vec::with_capacity(config.rho_grid.len());
    for &rho in &config.rho_grid {
        let spec = config.spec(rho)?;
        let ledgers: Vec<(StrategyLedger, StrategyLedger)> = (0..config.n_scenarios)
            .into_par_iter()
            .with_min_len(16)
            .map(|i| {
                let sc = build_scenario(&spec, seed.path(i as u64))?;
                Ok((
                    lookahead_strategy(&sc, &times, config.hold)?,
                    natural_strategy(&sc, &times, config.hold)?,
                ))
            })
            .collect::<Result<_>>()?;
        let (lookahead_ledgers, natural_ledgers): (Vec<_>, Vec<_>) = ledgers.into_iter().unzip();
        let dominance_failures = lookahead_ledgers
            .iter()
            .zip(&natural_ledgers)
            .filter(|(la, nat)| {
                let entries: Vec<f64> = la.trades.iter().map(|t| t.entry_t).collect();
                la.total_pnl < nat.pnl_at_entries(&entries)
            })
            .count();
        results.push(RhoReport {
            rho,
            mu: spec.levy.mu,
            exact_construction: rho == 1.0 && config.hold == 1.0,
            lookahead: ArmSummary::from_ledgers(&lookahead_ledgers),
            natural: ArmSummary::from_ledgers(&natural_ledgers),
            dominance_failures,
            lookahead_ledgers,
            natural_ledgers,
        });
    }
    Ok(ArbitrageReport {
        config: config.clone(),
        seed,
        results,
    })
}

/// Ledger CSV with header `scenario,entry_t,exit_t,direction,entry_price,exit_price,pnl`.
pub fn write_ledger_csv<W: Write>(mut out: W, ledgers: &[StrategyLedger]) -> Result<()> {
    writeln!(out, "scenario,entry_t,exit_t,direction,entry_price,exit_price,pnl")?;
    for (i, ledger) in ledgers.iter().enumerate() {
        for t in &ledger.trades {
            writeln!(
                out,
                "{i},{},{},{},{},{},{}",
                fmt_num(t.entry_t),
                fmt_num(t.exit_t),
                t.direction.as_str(),
                fmt_num(t.entry_price),
                fmt_num(t.exit_price),
                fmt_num(t.pnl)
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_parses_from_number_or_keyword() {
        let d: Drift = serde_json::from_str("\"martingale\"").unwrap();
        assert!((d.resolve(0.4).unwrap() + 0.08).abs() < 1e-15);
        let d: Drift = serde_json::from_str("0.25").unwrap();
        assert_eq!(d.resolve(1.0).unwrap(), 0.25);
        assert!(serde_json::from_str::<Drift>("\"other\"").is_err());
    }

    #[test]
    fn single_scenario_gives_one_ledger_per_arm() {
        let mut cfg = ArbitrageConfig::new(1);
        cfg.rho_grid = vec![1.0];
        let report = run_arbitrage_experiment(&cfg, Seed::new(3)).unwrap();
        let r = &report.results[0];
        assert_eq!(r.lookahead_ledgers.len(), 1);
        assert_eq!(r.natural_ledgers.len(), 1);
        assert!(r.exact_construction);
        let json = serde_json::to_value(&report).unwrap();
        assert!(json["results"][0]["lookahead"].get("t_stat").is_some());
        assert_eq!(json["config"]["n_scenarios"], 1);
    }

    #[test]
    fn lookahead_edge_grows_with_rho() {
        let mut cfg = ArbitrageConfig::new(400);
        cfg.drift = Drift::Named(DriftName::Martingale);
        let report = run_arbitrage_experiment(&cfg, Seed::new(11)).unwrap();
        let means: Vec<f64> = report.results.iter().map(|r| r.lookahead.mean_pnl).collect();
        assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
        let unit = report.for_rho(1.0).unwrap();
        assert_eq!(unit.dominance_failures, 0);
        assert!(unit.lookahead.min_trade_pnl.unwrap() >= 0.0);
        assert!(unit.lookahead.t_stat.unwrap() > 3.0);
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = ArbitrageConfig::new(20);
        let a = run_arbitrage_experiment(&cfg, Seed::new(1)).unwrap();
        let b = run_arbitrage_experiment(&cfg, Seed::new(1)).unwrap();
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_ledger_csv(&mut csv_a, &a.results[2].lookahead_ledgers).unwrap();
        write_ledger_csv(&mut csv_b, &b.results[2].lookahead_ledgers).unwrap();
        assert_eq!(csv_a, csv_b);
        assert!(String::from_utf8(csv_a)
            .unwrap()
            .starts_with("scenario,entry_t,exit_t,direction,entry_price,exit_price,pnl\n"));
    }

    #[test]
    fn validation_names_fields() {
        let mut cfg = ArbitrageConfig::new(0);
        assert!(matches!(cfg.validate(), Err(Error::Config { ref field, .. }) if field == "n_scenarios"));
        cfg.n_scenarios = 5;
        cfg.rho_grid = vec![1.5];
        assert!(matches!(cfg.validate(), Err(Error::Config { ref field, .. }) if field == "rho_grid"));
        cfg.rho_grid = vec![1.0];
        cfg.hold = -1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config { ref field, .. }) if field == "hold"));
    }
}
