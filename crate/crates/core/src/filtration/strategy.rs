use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::MarketScenario;

use super::info::{enlarged_info, AccessAudit, InformationSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Long,
    Short,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Long => 1.0,
            Direction::Short => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Long => "long",
            Direction::Short => "short",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trade {
    pub entry_t: f64,
    pub exit_t: f64,
    pub direction: Direction,
    pub entry_price: f64,
    pub exit_price: f64,
    pub pnl: f64,
}

impl Trade {
    fn book(entry_t: f64, exit_t: f64, direction: Direction, entry_price: f64, exit_price: f64) -> Self {
        Self {
            entry_t,
            exit_t,
            direction,
            entry_price,
            exit_price,
            pnl: direction.sign() * (exit_price - entry_price),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StrategyLedger {
    pub trades: Vec<Trade>,
    pub total_pnl: f64,
    pub n_opportunities: usize,
    /// Check times whose exit would fall beyond the scenario horizon.
    pub n_skipped: usize,
    pub audit: AccessAudit,
}

impl StrategyLedger {
    fn push(&mut self, trade: Trade) {
        self.total_pnl += trade.pnl;
        self.trades.push(trade);
    }

    /// Sum of pnl over trades entered at one of `entries`, in ledger order.
    pub fn pnl_at_entries(&self, entries: &[f64]) -> f64 {
        self.trades
            .iter()
            .filter(|t| entries.contains(&t.entry_t))
            .map(|t| t.pnl)
            .sum()
    }
}

/// Integer check times `0, 1, ..., floor(horizon - hold)`.
pub fn default_check_times(horizon: f64, hold: f64) -> Vec<f64> {
    if hold > horizon {
        return Vec::new();
    }
    (0..=((horizon - hold) + 1e-9).floor() as usize).map(|k| k as f64).collect()
}

fn exit_in_range(scenario: &MarketScenario, t: f64, hold: f64) -> bool {
    t >= 0.0 && t + hold <= scenario.grid().t_max()
}

/// Trades at each check time `t` with `C_t > t + hold`, when the enlarged
/// filtration already contains the clock up to `t + hold` and `W` up to
/// `T_{t+hold} <= t`. The direction follows the sign of the foreseeable
/// log-return `mu dT + sigma rho dW(T)` over the holding period, which is the
/// whole return when `rho = 1`.
pub fn lookahead_strategy(scenario: &MarketScenario, check_times: &[f64], hold: f64) -> Result<StrategyLedger> {
    check_hold(hold)?;
    let mut ledger = StrategyLedger::default();
    for &t in check_times {
        if !exit_in_range(scenario, t, hold) {
            ledger.n_skipped += 1;
            continue;
        }
        let info = match enlarged_info(scenario, t) {
            Ok(info) => info,
            Err(Error::Horizon { .. }) => InformationSet::censored_enlarged(scenario, t)?,
            Err(e) => return Err(e),
        };
        let exit_t = t + hold;
        if !(info.censored || info.w_known_until > exit_t) {
            continue;
        }
        ledger.n_opportunities += 1;
        let now = info.foreseeable_log_return(t)?;
        let later = info.foreseeable_log_return(exit_t)?;
        let direction = if later > now { Direction::Long } else { Direction::Short };
        let entry = info.price(t)?;
        ledger.audit.merge(&info.audit());
        // Settlement at the exit time is booked from the ground truth.
        ledger.push(Trade::book(t, exit_t, direction, entry, scenario.price_at(exit_t)?));
    }
    Ok(ledger)
}

/// Control arm: trades at every admissible check time using only prices up to
/// `t`, long after a nonnegative return over the previous holding period.
pub fn natural_strategy(scenario: &MarketScenario, check_times: &[f64], hold: f64) -> Result<StrategyLedger> {
    check_hold(hold)?;
    let mut ledger = StrategyLedger::default();
    for &t in check_times {
        if !exit_in_range(scenario, t, hold) {
            ledger.n_skipped += 1;
            continue;
        }
        ledger.n_opportunities += 1;
        let info = InformationSet::natural(scenario, t)?;
        let past = info.log_price((t - hold).max(0.0))?;
        let now = info.log_price(t)?;
        let direction = if now >= past { Direction::Long } else { Direction::Short };
        let entry = info.price(t)?;
        ledger.audit.merge(&info.audit());
        ledger.push(Trade::book(t, t + hold, direction, entry, scenario.price_at(t + hold)?));
    }
    Ok(ledger)
}

fn check_hold(hold: f64) -> Result<()> {
    if hold.is_finite() && hold > 0.0 {
        Ok(())
    } else {
        Err(crate::error::domain("hold", format!("must be > 0, got {hold}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PathGrid;
    use crate::levy::LevyParams;
    use crate::scenario::{build_scenario, ScenarioSpec};
    use crate::seed::Seed;
    use crate::time_change::RateModel;

    fn scenario(levy: LevyParams, model: RateModel, seed: u64) -> MarketScenario {
        let spec = ScenarioSpec::new(levy, model, PathGrid::new(10.0, 1280).unwrap(), 1.0).with_refinement(2);
        build_scenario(&spec, Seed::new(seed)).unwrap()
    }

    #[test]
    fn check_times_default_to_integers() {
        assert_eq!(default_check_times(10.0, 1.0), (0..10).map(f64::from).collect::<Vec<_>>());
        assert_eq!(default_check_times(2.5, 1.0), vec![0.0, 1.0]);
        assert!(default_check_times(0.5, 1.0).is_empty());
    }

    #[test]
    fn unit_rho_trades_never_lose() {
        let levy = LevyParams::new(0.0, 1.0, 1.0).unwrap();
        let times = default_check_times(10.0, 1.0);
        let mut n_trades = 0;
        for seed in 0..50 {
            let sc = scenario(levy, RateModel::ExpBm, seed);
            let la = lookahead_strategy(&sc, &times, 1.0).unwrap();
            let nat = natural_strategy(&sc, &times, 1.0).unwrap();
            assert!(la.trades.iter().all(|t| t.pnl >= 0.0));
            assert_eq!(la.audit.violations, 0);
            assert_eq!(nat.audit.violations, 0);
            assert!(la.audit.max_w_read <= 10.0);
            assert!(nat.audit.max_price_read <= 9.0);
            let entries: Vec<f64> = la.trades.iter().map(|t| t.entry_t).collect();
            assert!(la.total_pnl >= nat.pnl_at_entries(&entries));
            let sum: f64 = la.trades.iter().map(|t| t.pnl).sum();
            assert_eq!(sum, la.total_pnl);
            n_trades += la.trades.len();
        }
        assert!(n_trades > 50);
    }

    #[test]
    fn identity_clock_has_no_opportunities() {
        let sc = scenario(LevyParams::new(0.0, 1.0, 1.0).unwrap(), RateModel::Constant { rate: 1.0 }, 3);
        let la = lookahead_strategy(&sc, &default_check_times(10.0, 1.0), 1.0).unwrap();
        assert_eq!(la.n_opportunities, 0);
        assert!(la.trades.is_empty());
    }

    #[test]
    fn zero_volatility_pnl_is_zero_either_way() {
        let sc = scenario(LevyParams::new(0.0, 0.0, 1.0).unwrap(), RateModel::ExpBm, 5);
        let times = default_check_times(10.0, 1.0);
        for ledger in [
            lookahead_strategy(&sc, &times, 1.0).unwrap(),
            natural_strategy(&sc, &times, 1.0).unwrap(),
        ] {
            assert!(ledger.trades.iter().all(|t| t.pnl == 0.0));
        }
    }

    #[test]
    fn skips_are_counted_and_runs_repeat() {
        let sc = scenario(LevyParams::new(0.0, 1.0, 1.0).unwrap(), RateModel::ExpBm, 8);
        let times = [0.0, 8.5, 9.5, 12.0];
        let a = natural_strategy(&sc, &times, 1.0).unwrap();
        assert_eq!(a.n_skipped, 2);
        assert_eq!(a.n_opportunities, 2);
        assert_eq!(a, natural_strategy(&sc, &times, 1.0).unwrap());
        assert_eq!(lookahead_strategy(&sc, &times, 1.0).unwrap().n_skipped, 2);
        assert!(lookahead_strategy(&sc, &times, 0.0).is_err());
    }
}
