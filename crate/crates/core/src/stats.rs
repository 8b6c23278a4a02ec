//! Streaming sample statistics.

use serde::{Deserialize, Serialize};

/// Welford accumulator; merging follows Chan et al. so chunked batches can be
/// combined in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn summary(&self) -> MeanSummary {
        MeanSummary {
            mean: self.mean(),
            std_error: self.std_error(),
            n: self.n,
        }
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::new();
        iter.into_iter().for_each(|x| w.push(x));
        w
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSummary {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

impl MeanSummary {
    /// `(mean - target) / std_error`; `None` when the standard error is zero and
    /// the mean differs from the target.
    pub fn z_score(&self, target: f64) -> Option<f64> {
        let diff = self.mean - target;
        if self.std_error > 0.0 {
            Some(diff / self.std_error)
        } else if diff == 0.0 {
            Some(0.0)
        } else {
            None
        }
    }

    pub fn within(&self, target: f64, n_se: f64) -> bool {
        self.z_score(target).is_some_and(|z| z.abs() <= n_se)
    }
}
