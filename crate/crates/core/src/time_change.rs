//! Stochastic clocks: activity-rate models, the integrated clock
//! `T_t = int_0^t v_s ds`, first level-crossing times `C_s = inf{t > 0: T_t > s}`
//! and the inverse relation `T_s = inf{u >= 0: C_u > s}`.
//!
//! Discrete clocks are always extended piecewise-linearly between grid points.
//! [`crossing_time`], [`crossing_curve`] and [`invert_crossing`] share that
//! single interpolant, which makes `{C_t >= s} = {T_s <= t}` hold exactly at
//! grid points.

use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};
use crate::export::write_columns;
use crate::grid::PathGrid;
use crate::seed::Seed;
use crate::stats::{MeanSummary, Welford};

/// Default calendar step, `2^-10`.
pub const DEFAULT_STEP: f64 = 1.0 / 1024.0;

/// Square-root (CIR) activity rate `dv = kappa (theta - v) dt + sigma_v sqrt(v) dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CirParams {
    pub kappa: f64,
    pub theta: f64,
    pub sigma_v: f64,
    pub v0: f64,
}

impl Default for CirParams {
    /// Repository defaults; not calibrated values.
    fn default() -> Self {
        Self {
            kappa: 3.0,
            theta: 1.0,
            sigma_v: 0.5,
            v0: 1.0,
        }
    }
}

impl CirParams {
    pub fn new(kappa: f64, theta: f64, sigma_v: f64, v0: f64) -> Result<Self> {
        let p = Self {
            kappa,
            theta,
            sigma_v,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !positive(self.kappa) {
            return Err(domain("kappa", format!("must be > 0, got {}", self.kappa)));
        }
        if !positive(self.theta) {
            return Err(domain("theta", format!("must be > 0, got {}", self.theta)));
        }
        if !nonneg(self.sigma_v) {
            return Err(domain("sigma_v", format!("must be >= 0, got {}", self.sigma_v)));
        }
        if !nonneg(self.v0) {
            return Err(domain("v0", format!("must be >= 0, got {}", self.v0)));
        }
        Ok(())
    }

    /// `2 kappa theta >= sigma_v^2`. Informational only.
    pub fn feller_satisfied(&self) -> bool {
        2.0 * self.kappa * self.theta >= self.sigma_v * self.sigma_v
    }

    /// `E[v_t] = theta + (v0 - theta) exp(-kappa t)`.
    pub fn mean_rate(&self, t: f64) -> f64 {
        self.theta + (self.v0 - self.theta) * (-self.kappa * t).exp()
    }

    /// `E[T_t] = theta t + (v0 - theta)(1 - exp(-kappa t)) / kappa`.
    pub fn mean_clock(&self, t: f64) -> f64 {
        self.theta * t + (self.v0 - self.theta) * (1.0 - (-self.kappa * t).exp()) / self.kappa
    }

    /// One full-truncation Euler step of the raw (possibly negative) state.
    pub(crate) fn euler_step(&self, raw: f64, h: f64, dw: f64) -> f64 {
        let pos = raw.max(0.0);
        raw + self.kappa * (self.theta - pos) * h + self.sigma_v * pos.sqrt() * dw
    }
}

/// Activity-rate model driven by the calendar-time Brownian motion `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum RateModel {
    /// `v = rate`, a deterministic clock `T_t = rate * t`.
    Constant { rate: f64 },
    /// CIR rate driven by `W`.
    Cir(CirParams),
    /// `v_s = exp(W_s - s^2 / 2)`.
    ExpBm,
}

impl RateModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            RateModel::Constant { rate } if !(rate.is_finite() && *rate >= 0.0) => {
                Err(domain("rate", format!("must be finite and >= 0, got {rate}")))
            }
            RateModel::Cir(p) => p.validate(),
            _ => Ok(()),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            RateModel::Constant { .. } => true,
            RateModel::Cir(p) => p.sigma_v == 0.0,
            RateModel::ExpBm => false,
        }
    }

    /// `E[T_t]`. For exp-BM, `int_0^t exp(s/2 - s^2/2) ds` in closed form.
    pub fn expected_clock(&self, t: f64) -> f64 {
        match self {
            RateModel::Constant { rate } => rate * t,
            RateModel::Cir(p) => p.mean_clock(t),
            RateModel::ExpBm => {
                let n = Normal::standard();
                (0.125f64).exp() * (2.0 * std::f64::consts::PI).sqrt() * (n.cdf(t - 0.5) - n.cdf(-0.5))
            }
        }
    }

    /// Rate path from a driver `W` sampled on `grid`.
    pub fn activity(&self, grid: PathGrid, driver: &[f64]) -> Result<ActivityPath> {
        self.validate()?;
        match self {
            RateModel::Constant { rate } => {
                check_len(grid, driver)?;
                Ok(ActivityPath {
                    grid,
                    v: vec![*rate; grid.len()],
                })
            }
            RateModel::Cir(p) => simulate_cir(p, grid, driver),
            RateModel::ExpBm => exp_bm_rate(grid, driver),
        }
    }
}

fn check_len(grid: PathGrid, driver: &[f64]) -> Result<()> {
    if driver.len() != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: driver.len(),
        });
    }
    Ok(())
}

/// Business activity rate `v = dT/dt` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityPath {
    pub grid: PathGrid,
    pub v: Vec<f64>,
}

impl ActivityPath {
    pub fn new(grid: PathGrid, v: Vec<f64>) -> Result<Self> {
        check_len(grid, &v)?;
        Ok(Self { grid, v })
    }

    pub fn max(&self) -> f64 {
        self.v.iter().copied().fold(0.0, f64::max)
    }
}

/// Full-truncation Euler discretization of the CIR rate driven by `driver`;
/// the output is floored at zero.
pub fn simulate_cir(params: &CirParams, grid: PathGrid, driver: &[f64]) -> Result<ActivityPath> {
    params.validate()?;
    check_len(grid, driver)?;
    let h = grid.step();
    let mut raw = params.v0;
    let mut v = Vec::with_capacity(grid.len());
    v.push(raw.max(0.0));
    for w in driver.windows(2) {
        raw = params.euler_step(raw, h, w[1] - w[0]);
        v.push(raw.max(0.0));
    }
    Ok(ActivityPath { grid, v })
}

/// `v_s = exp(W_s - s^2 / 2)` at each grid point.
pub fn exp_bm_rate(grid: PathGrid, driver: &[f64]) -> Result<ActivityPath> {
    check_len(grid, driver)?;
    let v = grid
        .points()
        .zip(driver)
        .map(|(s, &w)| (w - 0.5 * s * s).exp())
        .collect();
    Ok(ActivityPath { grid, v })
}

/// Nondecreasing clock `T` on a grid with `T[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChangePath {
    pub grid: PathGrid,
    pub clock: Vec<f64>,
}

impl TimeChangePath {
    pub fn new(grid: PathGrid, clock: Vec<f64>) -> Result<Self> {
        check_len(grid, &clock)?;
        if clock[0] != 0.0 {
            return Err(Error::Contract(format!("clock must start at 0, got {}", clock[0])));
        }
        if clock.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("clock values must be finite".into()));
        }
        if clock.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Contract("clock must be nondecreasing".into()));
        }
        Ok(Self { grid, clock })
    }

    /// `T_t = a * t` on `grid`.
    pub fn linear(grid: PathGrid, slope: f64) -> Result<Self> {
        Self::new(grid, grid.points().map(|t| slope * t).collect())
    }

    /// Piecewise-linear interpolant at calendar time `t`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.grid.interpolate(&self.clock, t)
    }

    pub fn last(&self) -> f64 {
        *self.clock.last().unwrap()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.clock.windows(2).all(|w| w[1] > w[0])
    }
}

/// Trapezoidal cumulative integral of the rate; exact for piecewise-linear rates.
pub fn integrate_rate(rate: &ActivityPath) -> Result<TimeChangePath> {
    if let Some(bad) = rate.v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(domain("rate", format!("entries must be finite and >= 0, found {bad}")));
    }
    let h = rate.grid.step();
    let mut clock = Vec::with_capacity(rate.v.len());
    let mut acc = 0.0;
    clock.push(acc);
    for w in rate.v.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        clock.push(acc);
    }
    Ok(TimeChangePath {
        grid: rate.grid,
        clock,
    })
}

/// Crossing of `level` inside the step `[t_lo, t_hi]` where
/// `y_lo <= level < y_hi`. The result lies in `[t_lo, t_hi)`, even after
/// rounding, so comparisons against grid points agree with comparisons of the
/// clock values themselves.
pub(crate) fn crossing_in_step(t_lo: f64, t_hi: f64, y_lo: f64, y_hi: f64, level: f64) -> f64 {
    debug_assert!(y_lo <= level && level < y_hi);
    let frac = (level - y_lo) / (y_hi - y_lo);
    let t = t_lo + frac * (t_hi - t_lo);
    if t >= t_hi {
        t_hi.next_down().max(t_lo)
    } else {
        t
    }
}

fn crossing_from(clock: &TimeChangePath, level: f64, first_above: usize) -> f64 {
    if first_above >= clock.clock.len() {
        return f64::INFINITY;
    }
    // T[0] = 0 <= level, so the first strict exceedance has index >= 1.
    let j = first_above;
    let g = &clock.grid;
    crossing_in_step(g.point(j - 1), g.point(j), clock.clock[j - 1], clock.clock[j], level)
}

/// First time the piecewise-linear clock strictly exceeds `level`;
/// `+inf` when it never does on the grid.
pub fn crossing_time(clock: &TimeChangePath, level: f64) -> Result<f64> {
    if !(level >= 0.0) {
        return Err(domain("level", format!("must be >= 0, got {level}")));
    }
    let j = clock.clock.partition_point(|&x| x <= level);
    Ok(crossing_from(clock, level, j))
}

/// Levels with their first-crossing times.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingCurve {
    pub levels: Vec<f64>,
    pub times: Vec<f64>,
}

impl CrossingCurve {
    /// Drops the trailing levels the clock never exceeds.
    pub fn finite_prefix(&self) -> CrossingCurve {
        let k = self.times.partition_point(|t| t.is_finite());
        CrossingCurve {
            levels: self.levels[..k].to_vec(),
            times: self.times[..k].to_vec(),
        }
    }

    /// CSV with header `level,C`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_columns(out, &["level", "C"], &[&self.levels, &self.times])?;
        Ok(())
    }
}

/// [`crossing_time`] for ascending `levels` in one monotone sweep.
pub fn crossing_curve(clock: &TimeChangePath, levels: &[f64]) -> Result<CrossingCurve> {
    if levels.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Contract("levels must be sorted ascending".into()));
    }
    if let Some(&first) = levels.first() {
        if !(first >= 0.0) {
            return Err(domain("level", format!("must be >= 0, got {first}")));
        }
    }
    let mut j = 0;
    let times = levels
        .iter()
        .map(|&level| {
            while j < clock.clock.len() && clock.clock[j] <= level {
                j += 1;
            }
            crossing_from(clock, level, j)
        })
        .collect();
    Ok(CrossingCurve {
        levels: levels.to_vec(),
        times,
    })
}

/// Reconstructs the clock on `grid` from a crossing curve via
/// `T_s = inf{u >= 0: C_u > s}`, with `C` extended linearly between levels.
///
/// The curve must have finite, strictly increasing times (use
/// [`CrossingCurve::finite_prefix`] first) and must cover `grid`: the last
/// crossing time may not fall before `grid.t_max()`.
pub fn invert_crossing(curve: &CrossingCurve, grid: PathGrid) -> Result<TimeChangePath> {
    let (levels, times) = (&curve.levels, &curve.times);
    if levels.is_empty() || levels.len() != times.len() {
        return Err(Error::Contract("crossing curve must be non-empty with one time per level".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Contract("crossing times must be finite".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || levels.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Contract("crossing curve must be strictly increasing".into()));
    }
    let c_last = *times.last().unwrap();
    if c_last < grid.t_max() {
        return Err(Error::Contract(format!(
            "crossing curve covers calendar time up to {c_last}, grid needs {}",
            grid.t_max()
        )));
    }
    let mut k = 0;
    let mut clock = Vec::with_capacity(grid.len());
    for s in grid.points() {
        // First level whose crossing time strictly exceeds s.
        while k < times.len() && times[k] <= s {
            k += 1;
        }
        let value = if k == times.len() {
            // s == c_last
            levels[k - 1]
        } else if k == 0 {
            // Only a curve starting at level 0 pins the clock before its first crossing.
            if levels[0] != 0.0 {
                return Err(Error::Contract(format!(
                    "clock at {s} is below the lowest level {}",
                    levels[0]
                )));
            }
            0.0
        } else {
            let frac = (s - times[k - 1]) / (times[k] - times[k - 1]);
            levels[k - 1] + frac * (levels[k] - levels[k - 1])
        };
        clock.push(value);
    }
    TimeChangePath::new(grid, clock)
}

/// Number of sign changes of `T_t - t` over the grid, ignoring exact ties.
pub fn identity_crossings(clock: &TimeChangePath) -> usize {
    let mut last_sign = 0i8;
    let mut count = 0;
    for (t, &y) in clock.grid.points().zip(&clock.clock) {
        let d = y - t;
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                count += 1;
            }
            last_sign = sign;
        }
    }
    count
}

/// Calendar-time driver `W` alone, one normal per step.
pub fn simulate_driver(grid: PathGrid, seed: Seed) -> Vec<f64> {
    let mut rng = seed.rng();
    let sqrt_h = grid.step().sqrt();
    let mut w = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    w.push(acc);
    for _ in 0..grid.n_steps() {
        let z: f64 = StandardNormal.sample(&mut rng);
        acc += sqrt_h * z;
        w.push(acc);
    }
    w
}

/// Rate and clock for one path of `model` driven by [`simulate_driver`].
pub fn simulate_clock(model: &RateModel, grid: PathGrid, seed: Seed) -> Result<(ActivityPath, TimeChangePath)> {
    let driver = if model.is_deterministic() {
        vec![0.0; grid.len()]
    } else {
        simulate_driver(grid, seed)
    };
    let rate = model.activity(grid, &driver)?;
    let clock = integrate_rate(&rate)?;
    Ok((rate, clock))
}

/// CSV with header `t,v,T`.
pub fn write_clock_csv<W: Write>(rate: &ActivityPath, clock: &TimeChangePath, out: W) -> Result<()> {
    check_len(rate.grid, &clock.clock)?;
    let t: Vec<f64> = rate.grid.points().collect();
    write_columns(out, &["t", "v", "T"], &[&t, &rate.v, &clock.clock])?;
    Ok(())
}

const MEAN_CHUNK: u64 = 256;

/// Sample mean and standard error of `T_t` over `n_paths` independent clocks,
/// simulated with step [`DEFAULT_STEP`].
pub fn check_unconditional_mean(model: &RateModel, t: f64, n_paths: u64, seed: Seed) -> Result<MeanSummary> {
    unconditional_mean_with_step(model, t, n_paths, seed, DEFAULT_STEP)
}

pub fn unconditional_mean_with_step(
    model: &RateModel,
    t: f64,
    n_paths: u64,
    seed: Seed,
    step: f64,
) -> Result<MeanSummary> {
    model.validate()?;
    if n_paths < 2 {
        return Err(domain("n_paths", "must be >= 2"));
    }
    let grid = PathGrid::with_max_step(t, step)?;
    let n_chunks = n_paths.div_ceil(MEAN_CHUNK);
    let chunks: Vec<Result<Welford>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Welford::new();
            for i in c * MEAN_CHUNK..((c + 1) * MEAN_CHUNK).min(n_paths) {
                let (_, clock) = simulate_clock(model, grid, seed.path(i))?;
                acc.push(clock.last());
            }
            Ok(acc)
        })
        .collect();
    let mut total = Welford::new();
    for c in chunks {
        total.merge(&c?);
    }
    Ok(total.summary())
}
