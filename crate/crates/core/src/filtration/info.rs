use std::cell::Cell;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::scenario::MarketScenario;
use crate::time_change::crossing_time;

/// Record of every read made through an [`InformationSet`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AccessAudit {
    pub reads: u64,
    pub violations: u64,
    pub max_w_read: f64,
    pub max_clock_read: f64,
    pub max_price_read: f64,
}

impl AccessAudit {
    pub fn merge(&mut self, other: &AccessAudit) {
        self.reads += other.reads;
        self.violations += other.violations;
        self.max_w_read = self.max_w_read.max(other.max_w_read);
        self.max_clock_read = self.max_clock_read.max(other.max_clock_read);
        self.max_price_read = self.max_price_read.max(other.max_price_read);
    }
}

/// What an observer may read from a ground-truth scenario at one calendar time.
///
/// `W` is readable on `[0, w_known_until]`, prices on
/// `[0, observed_returns_until]`, and the clock on the union of both (the
/// clock up to `s` is a function of `W` up to `s`, and up to calendar time it is
/// also recovered from realized variance). Any other read fails with
/// [`Error::Information`] and is counted as a violation.
#[derive(Debug)]
pub struct InformationSet<'a> {
    scenario: &'a MarketScenario,
    pub calendar_time: f64,
    pub w_known_until: f64,
    pub observed_returns_until: f64,
    /// `C_t` lies beyond the simulated grid; `w_known_until` is then the grid end.
    pub censored: bool,
    audit: Cell<AccessAudit>,
}

impl<'a> InformationSet<'a> {
    fn with_extents(scenario: &'a MarketScenario, t: f64, w_known_until: f64, censored: bool) -> Self {
        Self {
            scenario,
            calendar_time: t,
            w_known_until,
            observed_returns_until: t,
            censored,
            audit: Cell::new(AccessAudit::default()),
        }
    }

    /// Natural filtration of the price: returns up to `t` and nothing of `W`.
    pub fn natural(scenario: &'a MarketScenario, t: f64) -> Result<Self> {
        check_time(scenario, t)?;
        Ok(Self::with_extents(scenario, t, 0.0, false))
    }

    /// Enlarged information with `W` known up to the grid end, used when the
    /// clock never reaches level `t` on the grid (so `C_t > t_max`).
    pub fn censored_enlarged(scenario: &'a MarketScenario, t: f64) -> Result<Self> {
        check_time(scenario, t)?;
        Ok(Self::with_extents(scenario, t, scenario.grid().t_max(), true))
    }

    pub fn scenario_horizon(&self) -> f64 {
        self.scenario.grid().t_max()
    }

    pub fn audit(&self) -> AccessAudit {
        self.audit.get()
    }

    fn record(&self, f: impl FnOnce(&mut AccessAudit)) {
        let mut a = self.audit.get();
        a.reads += 1;
        f(&mut a);
        self.audit.set(a);
    }

    fn deny(&self, what: &'static str, at: f64, limit: f64) -> Error {
        let mut a = self.audit.get();
        a.violations += 1;
        self.audit.set(a);
        Error::Information { what, at, limit }
    }

    pub fn w(&self, s: f64) -> Result<f64> {
        if s > self.w_known_until {
            return Err(self.deny("W", s, self.w_known_until));
        }
        self.record(|a| a.max_w_read = a.max_w_read.max(s));
        self.scenario.w_at(s)
    }

    pub fn clock(&self, s: f64) -> Result<f64> {
        let limit = self.w_known_until.max(self.calendar_time);
        if s > limit {
            return Err(self.deny("T", s, limit));
        }
        self.record(|a| a.max_clock_read = a.max_clock_read.max(s));
        self.scenario.clock_at(s)
    }

    pub fn log_price(&self, s: f64) -> Result<f64> {
        if s > self.observed_returns_until {
            return Err(self.deny("S", s, self.observed_returns_until));
        }
        self.record(|a| a.max_price_read = a.max_price_read.max(s));
        self.scenario.log_price_at(s)
    }

    pub fn price(&self, s: f64) -> Result<f64> {
        if s > self.observed_returns_until {
            return Err(self.deny("S", s, self.observed_returns_until));
        }
        self.record(|a| a.max_price_read = a.max_price_read.max(s));
        self.scenario.price_at(s)
    }

    /// The part of `log(S_s / s0)` that `W` determines:
    /// `mu T_s + sigma rho W(T_s)`. Equals the full log-return when `rho = 1`.
    pub fn foreseeable_log_return(&self, s: f64) -> Result<f64> {
        let tau = self.clock(s)?;
        let w = self.w(tau)?;
        let (drift, w_part, _) = self.scenario.levy.components(tau, w, 0.0);
        Ok(drift + w_part)
    }
}

fn check_time(scenario: &MarketScenario, t: f64) -> Result<()> {
    let t_max = scenario.grid().t_max();
    if !(0.0..=t_max).contains(&t) {
        return Err(domain("t", format!("{t} outside [0, {t_max}]")));
    }
    Ok(())
}

/// Information generated by `F^W_{C_t}` and `F^X_t`: `W` up to the first
/// crossing `C_t` of level `t`, prices up to `t`. Fails with a horizon error when
/// the clock never exceeds `t` on the grid.
pub fn enlarged_info(scenario: &MarketScenario, t: f64) -> Result<InformationSet<'_>> {
    check_time(scenario, t)?;
    let c = crossing_time(&scenario.clock, t)?;
    if !c.is_finite() {
        return Err(Error::Horizon {
            required: c,
            available: scenario.grid().t_max(),
        });
    }
    Ok(InformationSet::with_extents(scenario, t, c, false))
}
