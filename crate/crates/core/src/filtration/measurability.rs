//! Falsification test for the stopping-time property of a clock.
//!
//! If `C_t` were a function of the clock's history up to `t`, resimulating the
//! future from the Markov state at `t` would always give the same `C_t`. When
//! `T_t >= t` the crossing already happened and is read off the history. When
//! `T_t < t` the crossing lies in the future; positive dispersion of the
//! resimulated crossings falsifies measurability at simulation resolution.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::grid::PathGrid;
use crate::seed::Seed;
use crate::stats::Welford;
use crate::time_change::{
    crossing_in_step, crossing_time, integrate_rate, simulate_driver, RateModel, TimeChangePath, DEFAULT_STEP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// `T_t >= t`: `C_t <= t` lies in the observed history.
    Determined,
    /// `T_t < t`: `C_t > t` needs the future of the clock.
    Undetermined,
}

/// Boundary `T_t = t` counts as determined.
pub fn classify_time(clock: &TimeChangePath, t: f64) -> Result<Classification> {
    let value = clock
        .value_at(t)
        .ok_or_else(|| domain("t", format!("{t} outside [0, {}]", clock.grid.t_max())))?;
    Ok(classify_value(value, t))
}

fn classify_value(clock_value: f64, t: f64) -> Classification {
    if clock_value >= t {
        Classification::Determined
    } else {
        Classification::Undetermined
    }
}

/// Markov state of the rate at the conditioning time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateState {
    Constant { rate: f64 },
    /// Unfloored full-truncation state.
    Cir { raw: f64 },
    ExpBm { w: f64 },
}

impl RateState {
    fn rate(&self, s: f64) -> f64 {
        match *self {
            RateState::Constant { rate } => rate,
            RateState::Cir { raw } => raw.max(0.0),
            RateState::ExpBm { w } => (w - 0.5 * s * s).exp(),
        }
    }
}

/// Clock value and rate state at calendar time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockState {
    pub t: f64,
    pub clock: f64,
    pub rate: RateState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurabilityOptions {
    pub step: f64,
    /// Calendar time simulated past `t` before a continuation is censored.
    pub max_continuation: f64,
}

impl Default for MeasurabilityOptions {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            max_continuation: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurabilityReport {
    pub t: f64,
    pub state: ClockState,
    pub classification: Classification,
    pub n_continuations: usize,
    pub crossing_samples: Vec<f64>,
    pub n_censored: usize,
    /// More than 1% of continuations were censored.
    pub censored_flag: bool,
    /// Sample standard deviation of the uncensored crossing samples.
    pub dispersion: f64,
}

/// Simulates a history of `model` up to `t`, classifies `t`, and, if the
/// crossing lies in the future, resimulates `n_continuations` futures from the
/// state at `t` and measures the spread of the resulting `C_t`.
pub fn measurability_test(
    model: &RateModel,
    t: f64,
    base_seed: Seed,
    n_continuations: usize,
    opts: &MeasurabilityOptions,
) -> Result<MeasurabilityReport> {
    model.validate()?;
    if n_continuations < 2 {
        return Err(domain("n_continuations", "must be >= 2"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(domain("t", format!("must be > 0, got {t}")));
    }
    let (state, history) = simulate_history(model, t, base_seed, opts.step)?;
    let classification = classify_value(state.clock, t);
    if classification == Classification::Determined {
        let c = crossing_time(&history, t)?;
        // On the boundary T_t = t the clock reaches the level exactly at t.
        let c = if c.is_finite() { c } else { t };
        return Ok(MeasurabilityReport {
            t,
            state,
            classification,
            n_continuations: 0,
            crossing_samples: vec![c],
            n_censored: 0,
            censored_flag: false,
            dispersion: 0.0,
        });
    }
    measure_from_state(model, &state, base_seed.derive(0xC0_17), n_continuations, opts)
        .map(|r| MeasurabilityReport { classification, ..r })
}

/// Continuation spread of `C_t` from an arbitrary state with `clock < t`.
pub fn measure_from_state(
    model: &RateModel,
    state: &ClockState,
    seed: Seed,
    n_continuations: usize,
    opts: &MeasurabilityOptions,
) -> Result<MeasurabilityReport> {
    let mut samples = Vec::with_capacity(n_continuations);
    let mut spread = Welford::new();
    let mut n_censored = 0;
    for j in 0..n_continuations {
        match continue_crossing(model, state, state.t, seed.path(j as u64), opts) {
            Some(c) => {
                spread.push(c);
                samples.push(c);
            }
            None => n_censored += 1,
        }
    }
    Ok(MeasurabilityReport {
        t: state.t,
        state: *state,
        classification: classify_value(state.clock, state.t),
        n_continuations,
        crossing_samples: samples,
        n_censored,
        censored_flag: n_censored * 100 > n_continuations,
        dispersion: spread.std_dev(),
    })
}

fn simulate_history(model: &RateModel, t: f64, seed: Seed, step: f64) -> Result<(ClockState, TimeChangePath)> {
    let grid = PathGrid::with_max_step(t, step)?;
    let driver = simulate_driver(grid, seed);
    let rate = model.activity(grid, &driver)?;
    let clock = integrate_rate(&rate)?;
    let rate_state = match model {
        RateModel::Constant { rate } => RateState::Constant { rate: *rate },
        RateModel::Cir(p) => {
            let h = grid.step();
            let raw = driver.windows(2).fold(p.v0, |x, w| p.euler_step(x, h, w[1] - w[0]));
            RateState::Cir { raw }
        }
        RateModel::ExpBm => RateState::ExpBm {
            w: *driver.last().unwrap(),
        },
    };
    let state = ClockState {
        t,
        clock: clock.last(),
        rate: rate_state,
    };
    Ok((state, clock))
}

/// First crossing of `level` by one simulated future of the clock started from
/// `state`, using the same trapezoid and interpolation rules as
/// [`crate::time_change`]. `None` if censored.
pub fn continue_crossing(
    model: &RateModel,
    state: &ClockState,
    level: f64,
    seed: Seed,
    opts: &MeasurabilityOptions,
) -> Option<f64> {
    if state.clock > level {
        return None;
    }
    let h = opts.step;
    let sqrt_h = h.sqrt();
    let max_steps = (opts.max_continuation / h).ceil() as usize;
    let mut rng = seed.rng();
    let mut rs = state.rate;
    let mut s = state.t;
    let mut v = rs.rate(s);
    let mut clock = state.clock;
    for k in 1..=max_steps {
        let s_next = state.t + k as f64 * h;
        rs = match (rs, model) {
            (RateState::Cir { raw }, RateModel::Cir(p)) => {
                let z: f64 = StandardNormal.sample(&mut rng);
                RateState::Cir {
                    raw: p.euler_step(raw, h, sqrt_h * z),
                }
            }
            (RateState::ExpBm { w }, _) => {
                let z: f64 = StandardNormal.sample(&mut rng);
                RateState::ExpBm { w: w + sqrt_h * z }
            }
            (other, _) => other,
        };
        let v_next = rs.rate(s_next);
        let clock_next = clock + 0.5 * h * (v + v_next);
        if clock_next > level {
            return Some(crossing_in_step(s, s_next, clock, clock_next, level));
        }
        s = s_next;
        v = v_next;
        clock = clock_next;
    }
    None
}
