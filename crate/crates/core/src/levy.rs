//! Continuous Lévy core: Brownian motion with drift built from a pair of
//! independent Brownian motions.
//!
//! The core is `X_t = mu*t + sigma*(rho*W_t + sqrt(1 - rho^2)*B_t)`. Its
//! characteristic exponent follows the convention
//!
//! ```text
//! E[exp(i u X_t)] = exp(-t psi(u)),   psi(u) = -i mu u + sigma^2 u^2 / 2
//! ```
//!
//! and every caller in the crate (Laplace transforms, Fourier pricing) relies on
//! that sign.

use std::io::Write;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::export::write_columns;
use crate::grid::PathGrid;
use crate::seed::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyParams {
    /// Drift per unit business time.
    pub mu: f64,
    /// Volatility per unit business time. Zero is accepted as a degenerate,
    /// noise-free core.
    pub sigma: f64,
    /// Weight of `W` in the Brownian part.
    pub rho: f64,
}

impl LevyParams {
    pub fn new(mu: f64, sigma: f64, rho: f64) -> Result<Self> {
        let p = Self { mu, sigma, rho };
        p.validate()?;
        Ok(p)
    }

    /// Core with the exponential-martingale drift `-sigma^2 / 2`.
    pub fn martingale(sigma: f64, rho: f64) -> Result<Self> {
        Self::new(martingale_drift(sigma)?, sigma, rho)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(domain("mu", "must be finite"));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(domain("sigma", format!("must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.rho.is_finite() && self.rho.abs() <= 1.0) {
            return Err(domain("rho", format!("must lie in [-1, 1], got {}", self.rho)));
        }
        Ok(())
    }

    /// Weight of `B`, `sqrt(1 - rho^2)`.
    pub fn rho_complement(&self) -> f64 {
        (1.0 - self.rho * self.rho).max(0.0).sqrt()
    }

    /// Variance of `X` per unit time; `sigma^2` for every `rho`.
    pub fn variance_rate(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// `X` at business time `tau` given `W(tau)` and `B(tau)`.
    pub fn value(&self, tau: f64, w: f64, b: f64) -> f64 {
        let (drift, w_part, b_part) = self.components(tau, w, b);
        drift + w_part + b_part
    }

    /// `(mu*tau, sigma*rho*w, sigma*sqrt(1-rho^2)*b)`. The look-ahead strategy
    /// foresees the first two terms; the stored price is built from the same
    /// three so the two stay bitwise consistent.
    pub fn components(&self, tau: f64, w: f64, b: f64) -> (f64, f64, f64) {
        (
            self.mu * tau,
            self.sigma * self.rho * w,
            self.sigma * self.rho_complement() * b,
        )
    }
}

/// Characteristic exponent `psi(u) = -i mu u + sigma^2 u^2 / 2`, with
/// `E[exp(i u X_t)] = exp(-t psi(u))`. Complex `u` is allowed.
pub fn char_exponent(params: &LevyParams, u: Complex64) -> Complex64 {
    let i = Complex64::i();
    -i * params.mu * u + 0.5 * params.sigma * params.sigma * u * u
}

/// Drift that makes `exp(X_t)` unit-mean: `-sigma^2 / 2`.
pub fn martingale_drift(sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(domain("sigma", format!("martingale drift needs sigma > 0, got {sigma}")));
    }
    Ok(-0.5 * sigma * sigma)
}

/// Two independent Brownian motions sampled on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPair {
    pub grid: PathGrid,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub seed: Seed,
}

/// Sequential generator for a Brownian pair. Each step consumes one normal for
/// `W` then one for `B`, so simulating `n` steps and then `m` more yields the
/// same values as simulating `n + m` steps at once.
pub(crate) struct PairSampler {
    rng: ChaCha8Rng,
    sqrt_h: f64,
    w: Vec<f64>,
    b: Vec<f64>,
}

impl PairSampler {
    pub(crate) fn new(step: f64, seed: Seed, capacity: usize) -> Self {
        let mut w = Vec::with_capacity(capacity + 1);
        let mut b = Vec::with_capacity(capacity + 1);
        w.push(0.0);
        b.push(0.0);
        Self {
            rng: seed.rng(),
            sqrt_h: step.sqrt(),
            w,
            b,
        }
    }

    pub(crate) fn steps(&self) -> usize {
        self.w.len() - 1
    }

    pub(crate) fn extend_to(&mut self, n_steps: usize) {
        while self.steps() < n_steps {
            let dw: f64 = StandardNormal.sample(&mut self.rng);
            let db: f64 = StandardNormal.sample(&mut self.rng);
            let (w, b) = (*self.w.last().unwrap(), *self.b.last().unwrap());
            self.w.push(w + self.sqrt_h * dw);
            self.b.push(b + self.sqrt_h * db);
        }
    }

    pub(crate) fn w(&self) -> &[f64] {
        &self.w
    }

    pub(crate) fn finish(self, grid: PathGrid, seed: Seed) -> BrownianPair {
        debug_assert_eq!(self.w.len(), grid.len());
        BrownianPair {
            grid,
            w: self.w,
            b: self.b,
            seed,
        }
    }
}

/// Gaussian increments with variance `h` per step, independent across steps and
/// between `W` and `B`; fully determined by `seed`.
pub fn simulate_brownian_pair(grid: PathGrid, seed: Seed) -> BrownianPair {
    let mut sampler = PairSampler::new(grid.step(), seed, grid.n_steps());
    sampler.extend_to(grid.n_steps());
    sampler.finish(grid, seed)
}

impl BrownianPair {
    pub fn w_at(&self, t: f64) -> Option<f64> {
        self.grid.interpolate(&self.w, t)
    }

    pub fn b_at(&self, t: f64) -> Option<f64> {
        self.grid.interpolate(&self.b, t)
    }

    /// CSV with header `t,w,b`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let t: Vec<f64> = self.grid.points().collect();
        write_columns(out, &["t", "w", "b"], &[&t, &self.w, &self.b])?;
        Ok(())
    }
}

/// `X` at every grid point of a calendar-time pair.
pub fn build_levy_path(pair: &BrownianPair, params: &LevyParams) -> Result<Vec<f64>> {
    params.validate()?;
    if pair.w.len() != pair.grid.len() || pair.b.len() != pair.grid.len() {
        return Err(Error::Shape {
            expected: pair.grid.len(),
            got: pair.w.len().min(pair.b.len()),
        });
    }
    Ok(pair
        .grid
        .points()
        .zip(pair.w.iter().zip(&pair.b))
        .map(|(t, (&w, &b))| params.value(t, w, b))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Welford;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponent_examples() {
        let unit = LevyParams::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(char_exponent(&unit, c(0.0, 0.0)), c(0.0, 0.0));
        assert_eq!(char_exponent(&unit, c(1.0, 0.0)), c(0.5, 0.0));
        let mart = LevyParams::new(-0.02, 0.2, 0.0).unwrap();
        assert!(char_exponent(&mart, c(0.0, -1.0)).norm() < 1e-16);
    }

    #[test]
    fn drift_examples() {
        assert!((martingale_drift(0.2).unwrap() + 0.02).abs() < 1e-16);
        assert_eq!(martingale_drift(1.0).unwrap(), -0.5);
        assert!(martingale_drift(0.0).is_err());
        assert!(martingale_drift(-1.0).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(LevyParams::new(0.0, 1.0, 1.5).is_err());
        assert!(LevyParams::new(0.0, -0.1, 0.0).is_err());
        assert!(LevyParams::new(f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn pair_is_deterministic_and_starts_at_zero() {
        let grid = PathGrid::new(1.0, 64).unwrap();
        let a = simulate_brownian_pair(grid, Seed::new(11));
        let b = simulate_brownian_pair(grid, Seed::new(11));
        assert_eq!(a, b);
        assert_eq!((a.w[0], a.b[0]), (0.0, 0.0));
        assert_ne!(a, simulate_brownian_pair(grid, Seed::new(12)));
    }

    #[test]
    fn pair_prefix_is_stable_under_extension() {
        let short = simulate_brownian_pair(PathGrid::new(1.0, 50).unwrap(), Seed::new(4).path(9));
        let long = simulate_brownian_pair(PathGrid::new(2.0, 100).unwrap(), Seed::new(4).path(9));
        assert_eq!(&long.w[..51], &short.w[..]);
        assert_eq!(&long.b[..51], &short.b[..]);
    }

    #[test]
    fn batch_variance_and_cross_correlation() {
        let grid = PathGrid::new(1.0, 8).unwrap();
        let root = Seed::new(2024);
        let n = 100_000;
        let mut w1 = Welford::new();
        let mut sq = Welford::new();
        let mut cross = Welford::new();
        for i in 0..n {
            let p = simulate_brownian_pair(grid, root.path(i));
            w1.push(p.w[8]);
            sq.push(p.w[8] * p.w[8]);
            let dw = p.w[3] - p.w[2];
            let db = p.b[3] - p.b[2];
            cross.push(dw * db);
        }
        // Var(W_1) = E[W_1^2] since the mean is 0; std error of W^2 is sqrt(2/n).
        let var = sq.mean() - w1.mean() * w1.mean();
        assert!((var - 1.0).abs() < 3.0 * sq.std_error(), "var {var}");
        // E[dW dB] = 0, each increment has variance h.
        assert!(cross.summary().within(0.0, 3.0), "cross {:?}", cross.summary());
    }

    #[test]
    fn levy_path_collapses() {
        let grid = PathGrid::new(1.0, 32).unwrap();
        let pair = simulate_brownian_pair(grid, Seed::new(5));
        let x = build_levy_path(&pair, &LevyParams::new(0.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(x, pair.w);
        let x = build_levy_path(&pair, &LevyParams::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(x, pair.b);
    }

    #[test]
    fn realized_qv_of_levy_path() {
        // QV at t=1 converges to sigma^2 with error of order sqrt(h).
        let grid = PathGrid::new(1.0, 4096).unwrap();
        let params = LevyParams::new(0.1, 0.7, 0.6).unwrap();
        let h = grid.step();
        for k in 0..20 {
            let pair = simulate_brownian_pair(grid, Seed::new(77).path(k));
            let x = build_levy_path(&pair, &params).unwrap();
            let qv: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            assert!((qv - 0.49).abs() < 5.0 * 0.49 * (2.0 * h).sqrt(), "qv {qv}");
        }
    }

    #[test]
    fn empirical_cf_matches_exponent() {
        let grid = PathGrid::new(1.0, 1).unwrap();
        let params = LevyParams::new(0.05, 0.8, 0.3).unwrap();
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let p = simulate_brownian_pair(grid, Seed::new(31).path(i));
                build_levy_path(&p, &params).unwrap()[1]
            })
            .collect();
        for u in [0.5, 1.0, 2.0] {
            let target = (-char_exponent(&params, c(u, 0.0))).exp();
            let re: Welford = xs.iter().map(|x| (u * x).cos()).collect();
            let im: Welford = xs.iter().map(|x| (u * x).sin()).collect();
            assert!(re.summary().within(target.re, 3.0), "u={u} re");
            assert!(im.summary().within(target.im, 3.0), "u={u} im");
        }
    }

    #[test]
    fn variance_rate_is_rho_invariant() {
        let grid = PathGrid::new(1.0, 4).unwrap();
        let n = 100_000;
        let sample = |rho: f64| -> Welford {
            let params = LevyParams::new(0.0, 0.5, rho).unwrap();
            (0..n)
                .map(|i| {
                    let p = simulate_brownian_pair(grid, Seed::new(8).path(i));
                    build_levy_path(&p, &params).unwrap()[4].powi(2)
                })
                .collect()
        };
        let (a, b) = (sample(0.0), sample(0.9));
        let joint = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
        assert!((a.mean() - b.mean()).abs() < 3.0 * joint);
    }

    #[test]
    fn pair_csv_header() {
        let pair = simulate_brownian_pair(PathGrid::new(1.0, 2).unwrap(), Seed::new(1));
        let mut buf = Vec::new();
        pair.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,w,b\n"));
        assert_eq!(text.lines().count(), 4);
    }

    proptest! {
        #[test]
        fn exponent_vanishes_at_origin(mu in -1.0..1.0f64, sigma in 0.0..2.0f64) {
            let p = LevyParams::new(mu, sigma, 0.0).unwrap();
            prop_assert_eq!(char_exponent(&p, c(0.0, 0.0)), c(0.0, 0.0));
        }

        #[test]
        fn exponent_hermitian(mu in -1.0..1.0f64, sigma in 0.0..2.0f64, re in -5.0..5.0f64, im in -5.0..5.0f64) {
            let p = LevyParams::new(mu, sigma, 0.0).unwrap();
            let u = c(re, im);
            let lhs = char_exponent(&p, u).conj();
            let rhs = char_exponent(&p, -u.conj());
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }
    }
}
