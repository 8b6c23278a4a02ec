use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Uniform calendar grid `0, h, 2h, ..., t_max` with `h = t_max / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    t_max: f64,
    n_steps: usize,
}

impl PathGrid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(domain("t_max", format!("must be finite and > 0, got {t_max}")));
        }
        if n_steps == 0 {
            return Err(domain("n_steps", "must be >= 1"));
        }
        Ok(Self { t_max, n_steps })
    }

    /// Grid over `[0, t_max]` whose step is the largest value not above `step`
    /// that divides `t_max` evenly.
    pub fn with_max_step(t_max: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(domain("step", format!("must be finite and > 0, got {step}")));
        }
        let n = (t_max / step - 1e-9).ceil().max(1.0) as usize;
        Self::new(t_max, n)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_steps);
        self.t_max * i as f64 / self.n_steps as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|i| self.point(i))
    }

    /// Bracketing step `i` and fraction in `[0, 1]` with `t = point(i) + frac * h`.
    /// `None` outside `[0, t_max]`.
    pub fn locate(&self, t: f64) -> Option<(usize, f64)> {
        if !(0.0..=self.t_max).contains(&t) {
            return None;
        }
        let h = self.step();
        let i = ((t / h).floor() as usize).min(self.n_steps - 1);
        let frac = ((t - self.point(i)) / h).clamp(0.0, 1.0);
        Some((i, frac))
    }

    /// Index of the grid point equal to `t`, if any (within a relative 1e-12).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = t / self.step();
        let i = x.round();
        ((x - i).abs() < 1e-9 && i >= 0.0 && i as usize <= self.n_steps).then_some(i as usize)
    }

    /// Piecewise-linear interpolation of `values` (one per grid point) at `t`.
    pub fn interpolate(&self, values: &[f64], t: f64) -> Option<f64> {
        debug_assert_eq!(values.len(), self.len());
        let (i, frac) = self.locate(t)?;
        if frac == 0.0 {
            return Some(values[i]);
        }
        if frac == 1.0 {
            return Some(values[i + 1]);
        }
        Some(values[i] + frac * (values[i + 1] - values[i]))
    }
}
