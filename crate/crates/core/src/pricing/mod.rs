//! European option pricing for time-changed Lévy models.
//!
//! With the clock independent of `X` (`rho = 0`) the characteristic function
//! of `X_{T_t}` is the Laplace transform of `T_t` evaluated at the
//! characteristic exponent of `X`. Prices from that transform are
//! cross-checked against Monte Carlo over simulated scenarios.
//!
//! The log-price at maturity is `ln S_T = ln spot + rate * T + X_{T_T}`, so
//! with the martingale drift the discounted price is a martingale.

mod compare;
mod fourier;
mod laplace;
mod monte_carlo;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::levy::{char_exponent, LevyParams};
use crate::time_change::RateModel;

pub use compare::{compare_prices, write_comparison_csv, ComparisonRow, ComparisonTable};
pub use fourier::{black_scholes, fourier_price};
pub use laplace::{deterministic_cir_clock, laplace_integrated_cir, log_laplace_integrated_cir};
pub use monte_carlo::{mc_price, mc_prices};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionSpec {
    pub strike: f64,
    pub maturity: f64,
    pub kind: OptionKind,
    pub spot: f64,
    #[serde(default)]
    pub rate: f64,
}

impl OptionSpec {
    pub fn call(strike: f64, maturity: f64, spot: f64) -> Self {
        Self {
            strike,
            maturity,
            kind: OptionKind::Call,
            spot,
            rate: 0.0,
        }
    }

    pub fn put(strike: f64, maturity: f64, spot: f64) -> Self {
        Self {
            kind: OptionKind::Put,
            ..Self::call(strike, maturity, spot)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("strike", self.strike), ("maturity", self.maturity), ("spot", self.spot)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(domain(name, format!("must be > 0, got {x}")));
            }
        }
        if !self.rate.is_finite() {
            return Err(domain("rate", "must be finite"));
        }
        Ok(())
    }

    pub fn discount(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }

    pub fn payoff(&self, s: f64) -> f64 {
        match self.kind {
            OptionKind::Call => (s - self.strike).max(0.0),
            OptionKind::Put => (self.strike - s).max(0.0),
        }
    }

    /// Lower no-arbitrage bound `max(0, +-(spot - strike * discount))`.
    pub fn intrinsic_bound(&self) -> f64 {
        let fwd = self.spot - self.strike * self.discount();
        match self.kind {
            OptionKind::Call => fwd.max(0.0),
            OptionKind::Put => (-fwd).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PricingConfig {
    /// Carr-Madan damping exponent of the call transform.
    pub damping: f64,
    pub u_max: f64,
    pub n_quad: usize,
    /// Tail estimates above this abort the Fourier price.
    pub tail_tolerance: f64,
    pub mc_paths: usize,
    /// Calendar step of the Monte Carlo scenarios.
    pub mc_step: f64,
    pub refinement: usize,
}

impl Default for PricingConfig {
    fn default() -> Self {
        Self {
            damping: 1.5,
            u_max: 200.0,
            n_quad: 4096,
            tail_tolerance: 1e-7,
            mc_paths: 100_000,
            mc_step: 1.0 / 256.0,
            refinement: 2,
        }
    }
}

impl PricingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping.is_finite() && self.damping > 1.0) {
            return Err(domain("damping", format!("must be > 1, got {}", self.damping)));
        }
        if !(self.u_max.is_finite() && self.u_max > 0.0) {
            return Err(domain("u_max", format!("must be > 0, got {}", self.u_max)));
        }
        if self.n_quad < 16 {
            return Err(domain("n_quad", format!("must be >= 16, got {}", self.n_quad)));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(domain("tail_tolerance", "must be > 0"));
        }
        if self.mc_paths < 100 {
            return Err(domain("mc_paths", format!("must be >= 100, got {}", self.mc_paths)));
        }
        if !(self.mc_step.is_finite() && self.mc_step > 0.0) {
            return Err(domain("mc_step", "must be > 0"));
        }
        if self.refinement == 0 {
            return Err(domain("refinement", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "CF")]
    Cf,
    #[serde(rename = "MC")]
    Mc,
    #[serde(rename = "BS-oracle")]
    BsOracle,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Integral beyond `u_max`, bounded from the last-node integrand.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_estimate: Option<f64>,
    /// Price change from halving the quadrature nodes, plus rounding.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discretization_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
}

impl Diagnostics {
    /// Total quadrature error estimate.
    pub fn error_estimate(&self) -> f64 {
        self.tail_estimate.unwrap_or(0.0) + self.discretization_estimate.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceReport {
    pub price: f64,
    pub method: Method,
    pub std_error: f64,
    pub diagnostics: Diagnostics,
}

/// A time-changed Lévy model: `X` driven through the clock of `rate_model`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingModel {
    pub levy: LevyParams,
    pub rate_model: RateModel,
}

impl PricingModel {
    pub fn new(levy: LevyParams, rate_model: RateModel) -> Self {
        Self { levy, rate_model }
    }

    pub fn validate(&self) -> Result<()> {
        self.levy.validate()?;
        self.rate_model.validate()
    }

    /// `E exp(i u X_{T_t})`.
    pub fn cf(&self, u: Complex64, t: f64) -> Result<Complex64> {
        cf_time_changed(&self.levy, &self.rate_model, u, t)
    }
}

/// `E exp(i u X_{T_t}) = L_{T_t}(psi(u))` for a clock independent of `X`.
///
/// Requires `rho = 0`: with `rho != 0` the clock and `X` share `W`, and the
/// transform needs a complex change of measure that is not implemented.
/// The exp-BM clock has no closed-form Laplace transform and is refused.
pub fn cf_time_changed(levy: &LevyParams, clock: &RateModel, u: Complex64, t: f64) -> Result<Complex64> {
    levy.validate()?;
    clock.validate()?;
    if levy.rho != 0.0 && levy.sigma != 0.0 {
        return Err(Error::Unsupported(format!(
            "rho = {} correlates X with the clock; the leverage transform is out of scope, use Monte Carlo",
            levy.rho
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain("t", format!("must be >= 0, got {t}")));
    }
    let psi = char_exponent(levy, u);
    match clock {
        RateModel::Constant { rate } => Ok((-psi * (rate * t)).exp()),
        RateModel::Cir(p) => laplace_integrated_cir(p, psi, t),
        RateModel::ExpBm => Err(Error::Unsupported(
            "exp-BM clock has no closed-form Laplace transform; use Monte Carlo".into(),
        )),
    }
}
