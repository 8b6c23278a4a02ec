//! Joint market scenario `S_t = s0 * exp(X_{T_t})`.
//!
//! One Brownian pair `(W, B)` is sampled on a fine grid (calendar step divided
//! by the refinement factor). `W` drives the activity rate in calendar time and
//! the same `W` enters `X` in business time, so `X` and `T` share one path.
//! The pair at each business time `T_t` is drawn from the Brownian bridge
//! between its fine-grid neighbours and added as a knot, so realized variance
//! sees exact Gaussian increments. Other times are read off the piecewise
//! linear path through all knots.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::export::write_columns;
use crate::grid::PathGrid;
use rand_distr::{Distribution, StandardNormal};

use crate::levy::{BrownianPair, LevyParams, PairSampler};
use crate::seed::Seed;
use crate::time_change::{integrate_rate, ActivityPath, RateModel, TimeChangePath};

pub const DEFAULT_REFINEMENT: usize = 4;
pub const DEFAULT_HORIZON_MARGIN: f64 = 1.1;

/// Everything needed to simulate a scenario except the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub levy: LevyParams,
    pub rate_model: RateModel,
    pub grid: PathGrid,
    pub s0: f64,
    /// Fine-grid steps per calendar step.
    pub refinement: usize,
    /// Business-time horizon is `margin * max(T_{t_max}, t_max)`.
    pub horizon_margin: f64,
    /// Optional cap on the business-time horizon.
    pub max_business_time: Option<f64>,
}

impl ScenarioSpec {
    pub fn new(levy: LevyParams, rate_model: RateModel, grid: PathGrid, s0: f64) -> Self {
        Self {
            levy,
            rate_model,
            grid,
            s0,
            refinement: DEFAULT_REFINEMENT,
            horizon_margin: DEFAULT_HORIZON_MARGIN,
            max_business_time: None,
        }
    }

    pub fn with_refinement(mut self, refinement: usize) -> Self {
        self.refinement = refinement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.levy.validate()?;
        self.rate_model.validate()?;
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return Err(domain("s0", format!("must be finite and > 0, got {}", self.s0)));
        }
        if self.refinement == 0 {
            return Err(domain("refinement", "must be >= 1"));
        }
        if !(self.horizon_margin >= 1.0) {
            return Err(domain("horizon_margin", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MarketScenario {
    /// `(W, B)` on the fine grid, long enough to cover both calendar time and
    /// the business-time horizon.
    pub pair: BrownianPair,
    /// Fine-grid knots merged with bridge samples at the business times.
    pub business: BusinessPath,
    pub levy: LevyParams,
    pub rate: ActivityPath,
    pub clock: TimeChangePath,
    /// Prices at calendar grid points.
    pub prices: Vec<f64>,
    pub s0: f64,
    pub seed: Seed,
    pub refinement: usize,
}

const BRIDGE_TAG: u64 = 0xB21D_6E00;

/// Piecewise linear `(W, B)` through sorted knots.
#[derive(Debug, Clone, PartialEq)]
pub struct BusinessPath {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl BusinessPath {
    /// Inserts bridge samples of `pair` at the nondecreasing times `taus`.
    fn bridged(pair: &BrownianPair, taus: &[f64], seed: Seed) -> Result<Self> {
        let grid = pair.grid;
        let n = grid.len() + taus.len();
        let mut path = Self {
            t: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
        };
        let mut rng = seed.rng();
        let mut next = 0;
        for &tau in taus {
            if !(tau <= grid.t_max()) {
                return Err(Error::Horizon {
                    required: tau,
                    available: grid.t_max(),
                });
            }
            while next < grid.len() && grid.point(next) <= tau {
                path.push(grid.point(next), pair.w[next], pair.b[next]);
                next += 1;
            }
            let (t0, w0, b0) = path.last();
            if tau == t0 {
                continue;
            }
            let (t1, w1, b1) = (grid.point(next), pair.w[next], pair.b[next]);
            let frac = (tau - t0) / (t1 - t0);
            let sd = ((tau - t0) * (t1 - tau) / (t1 - t0)).sqrt();
            let zw: f64 = StandardNormal.sample(&mut rng);
            let zb: f64 = StandardNormal.sample(&mut rng);
            path.push(tau, w0 + frac * (w1 - w0) + sd * zw, b0 + frac * (b1 - b0) + sd * zb);
        }
        while next < grid.len() {
            path.push(grid.point(next), pair.w[next], pair.b[next]);
            next += 1;
        }
        Ok(path)
    }

    fn push(&mut self, t: f64, w: f64, b: f64) {
        self.t.push(t);
        self.w.push(w);
        self.b.push(b);
    }

    fn last(&self) -> (f64, f64, f64) {
        let i = self.t.len() - 1;
        (self.t[i], self.w[i], self.b[i])
    }

    pub fn t_max(&self) -> f64 {
        *self.t.last().unwrap()
    }

    /// `(W, B)` at `tau`, or `None` outside `[0, t_max]`.
    pub fn at(&self, tau: f64) -> Option<(f64, f64)> {
        if !(0.0..=self.t_max()).contains(&tau) {
            return None;
        }
        let j = self.t.partition_point(|&s| s <= tau);
        let i = j - 1;
        if self.t[i] == tau || j == self.t.len() {
            return Some((self.w[i], self.b[i]));
        }
        let frac = (tau - self.t[i]) / (self.t[j] - self.t[i]);
        Some((
            self.w[i] + frac * (self.w[j] - self.w[i]),
            self.b[i] + frac * (self.b[j] - self.b[i]),
        ))
    }
}

pub fn build_scenario(spec: &ScenarioSpec, seed: Seed) -> Result<MarketScenario> {
    spec.validate()?;
    let grid = spec.grid;
    let r = spec.refinement;
    let fine_step = grid.step() / r as f64;
    let calendar_steps = grid.n_steps() * r;

    let mut sampler = PairSampler::new(fine_step, seed, calendar_steps);
    sampler.extend_to(calendar_steps);
    let driver: Vec<f64> = (0..=grid.n_steps()).map(|i| sampler.w()[i * r]).collect();
    let rate = spec.rate_model.activity(grid, &driver)?;
    let clock = integrate_rate(&rate)?;

    let required = clock.last();
    if let Some(cap) = spec.max_business_time {
        if required > cap {
            return Err(Error::Horizon {
                required,
                available: cap,
            });
        }
    }
    let horizon = required.max(grid.t_max()) * spec.horizon_margin;
    let fine_steps = ((horizon / fine_step).ceil() as usize).max(calendar_steps);
    sampler.extend_to(fine_steps);
    let fine_grid = PathGrid::new(fine_step * fine_steps as f64, fine_steps)?;
    let pair = sampler.finish(fine_grid, seed);
    let business = BusinessPath::bridged(&pair, &clock.clock, seed.derive(BRIDGE_TAG))?;

    let mut prices = Vec::with_capacity(grid.len());
    for &tau in &clock.clock {
        let (w, b) = business.at(tau).expect("business time is a knot");
        prices.push(spec.s0 * spec.levy.value(tau, w, b).exp());
    }
    Ok(MarketScenario {
        pair,
        business,
        levy: spec.levy,
        rate,
        clock,
        prices,
        s0: spec.s0,
        seed,
        refinement: r,
    })
}

impl MarketScenario {
    pub fn grid(&self) -> PathGrid {
        self.clock.grid
    }

    /// `W` at the calendar grid point `i`.
    pub fn w_calendar(&self, i: usize) -> f64 {
        self.pair.w[i * self.refinement]
    }

    pub fn b_calendar(&self, i: usize) -> f64 {
        self.pair.b[i * self.refinement]
    }

    /// Business-time horizon covered by the pair.
    pub fn business_horizon(&self) -> f64 {
        self.pair.grid.t_max()
    }

    fn business_read(&self, tau: f64) -> Result<(f64, f64)> {
        self.business.at(tau).ok_or(Error::Horizon {
            required: tau,
            available: self.business_horizon(),
        })
    }

    /// `W` at time `tau` (the same path serves calendar and business time).
    pub fn w_at(&self, tau: f64) -> Result<f64> {
        self.business_read(tau).map(|(w, _)| w)
    }

    pub fn clock_at(&self, t: f64) -> Result<f64> {
        self.clock
            .value_at(t)
            .ok_or_else(|| domain("t", format!("{t} outside [0, {}]", self.grid().t_max())))
    }

    /// `(mu T_t, sigma rho W(T_t), sigma sqrt(1-rho^2) B(T_t))` at calendar time `t`.
    pub fn log_return_components(&self, t: f64) -> Result<(f64, f64, f64)> {
        let tau = self.clock_at(t)?;
        let (w, b) = self.business_read(tau)?;
        Ok(self.levy.components(tau, w, b))
    }

    pub fn log_price_at(&self, t: f64) -> Result<f64> {
        let grid = self.grid();
        let (i, frac) = grid
            .locate(t)
            .ok_or_else(|| domain("t", format!("{t} outside [0, {}]", grid.t_max())))?;
        let lo = self.prices[i].ln();
        if frac == 0.0 {
            return Ok(lo);
        }
        let hi = self.prices[i + 1].ln();
        Ok(lo + frac * (hi - lo))
    }

    /// Price at calendar time `t`, interpolated linearly in `log S`.
    pub fn price_at(&self, t: f64) -> Result<f64> {
        let grid = self.grid();
        if let Some(i) = grid.index_of(t) {
            return Ok(self.prices[i]);
        }
        self.log_price_at(t).map(f64::exp)
    }

    /// Largest gap between `log(S/s0)` and `X` recomputed at `T_t` from the pair.
    pub fn consistency_error(&self) -> f64 {
        self.clock
            .clock
            .iter()
            .zip(&self.prices)
            .map(|(&tau, &s)| {
                let (w, b) = self.business_read(tau).unwrap();
                ((s / self.s0).ln() - self.levy.value(tau, w, b)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,w,b,v,T,S`; `w` and `b` are the calendar-time values.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let grid = self.grid();
        let t: Vec<f64> = grid.points().collect();
        let w: Vec<f64> = (0..grid.len()).map(|i| self.w_calendar(i)).collect();
        let b: Vec<f64> = (0..grid.len()).map(|i| self.b_calendar(i)).collect();
        write_columns(
            out,
            &["t", "w", "b", "v", "T", "S"],
            &[&t, &w, &b, &self.rate.v, &self.clock.clock, &self.prices],
        )?;
        Ok(())
    }
}

/// Realized quadratic variation of log prices and the clock it recovers.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedVarianceReport {
    pub grid: PathGrid,
    /// Cumulative sum of squared log-returns.
    pub qv: Vec<f64>,
    /// Factor turning `qv` into business time: `1 / sigma^2` (0 if `sigma = 0`).
    pub scale: f64,
    pub recovered_clock: Vec<f64>,
    /// `sup_t |recovered(t) - T_t|`.
    pub sup_distance: f64,
}

pub fn realized_qv(scenario: &MarketScenario) -> RealizedVarianceReport {
    let grid = scenario.grid();
    let mut qv = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    qv.push(acc);
    for w in scenario.prices.windows(2) {
        acc += (w[1] / w[0]).ln().powi(2);
        qv.push(acc);
    }
    let var_rate = scenario.levy.variance_rate();
    let scale = if var_rate > 0.0 { 1.0 / var_rate } else { 0.0 };
    let recovered_clock: Vec<f64> = qv.iter().map(|q| q * scale).collect();
    let sup_distance = recovered_clock
        .iter()
        .zip(&scenario.clock.clock)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    RealizedVarianceReport {
        grid,
        qv,
        scale,
        recovered_clock,
        sup_distance,
    }
}

pub fn price_at(scenario: &MarketScenario, t: f64) -> Result<f64> {
    scenario.price_at(t)
}
