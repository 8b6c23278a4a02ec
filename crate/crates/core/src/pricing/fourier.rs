use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};

use super::{Diagnostics, Method, OptionKind, OptionSpec, PriceReport, PricingConfig};

/// Carr-Madan price from `cf(u, t) = E exp(i u X_t)` of the log-return.
///
/// With forward `F = spot e^{rate T}` and `m = ln(K / F)`, the call is
/// `spot e^{-alpha m} / pi * int_0^inf Re[e^{-ivm} cf(v - (alpha+1)i) /
/// (alpha^2 + alpha - v^2 + i(2 alpha + 1) v)] dv`, integrated by the
/// trapezoid rule on `[0, u_max]`. Puts follow from parity, which is
/// therefore exact.
pub fn fourier_price<F>(cf: F, option: &OptionSpec, config: &PricingConfig) -> Result<PriceReport>
where
    F: Fn(Complex64, f64) -> Result<Complex64>,
{
    option.validate()?;
    config.validate()?;
    let alpha = config.damping;
    let t = option.maturity;
    let forward = option.spot * (option.rate * t).exp();
    let m = (option.strike / forward).ln();
    let n = config.n_quad;
    let eta = config.u_max / (n - 1) as f64;
    let shift = Complex64::new(0.0, -(alpha + 1.0));

    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let v = j as f64 * eta;
        let z = Complex64::new(v, 0.0) + shift;
        let phi = cf(z, t)?;
        let denom = Complex64::new(alpha * alpha + alpha - v * v, (2.0 * alpha + 1.0) * v);
        let f = (Complex64::new(0.0, -v * m).exp() * phi / denom).re;
        if !f.is_finite() {
            return Err(domain("cf", format!("non-finite transform at u = {v}")));
        }
        values.push(f);
    }
    let trapezoid = |stride: usize| {
        let last = (n - 1) / stride * stride;
        let inner: f64 = (stride..last).step_by(stride).map(|j| values[j]).sum();
        stride as f64 * eta * (inner + 0.5 * (values[0] + values[last]))
    };
    let scale = option.spot * (-alpha * m).exp() / PI;
    let integral = trapezoid(1);
    let call = scale * integral;

    let tail = scale * values[n - 1].abs() * config.u_max;
    let rounding = 16.0 * f64::EPSILON * scale * eta * values.iter().map(|f| f.abs()).sum::<f64>();
    let discretization = scale * (integral - trapezoid(2)).abs() + rounding;
    if tail > config.tail_tolerance {
        return Err(Error::Truncation {
            estimate: tail,
            tolerance: config.tail_tolerance,
        });
    }
    let price = match option.kind {
        OptionKind::Call => call,
        OptionKind::Put => call - option.spot + option.strike * option.discount(),
    };
    Ok(PriceReport {
        price,
        method: Method::Cf,
        std_error: 0.0,
        diagnostics: Diagnostics {
            tail_estimate: Some(tail),
            discretization_estimate: Some(discretization),
            n_paths: None,
        },
    })
}

/// Closed-form lognormal price with total volatility `vol * sqrt(T)`.
pub fn black_scholes(option: &OptionSpec, vol: f64) -> Result<PriceReport> {
    option.validate()?;
    if !(vol.is_finite() && vol >= 0.0) {
        return Err(domain("vol", format!("must be >= 0, got {vol}")));
    }
    let df = option.discount();
    let sd = vol * option.maturity.sqrt();
    let call = if sd == 0.0 {
        (option.spot - option.strike * df).max(0.0)
    } else {
        let n = Normal::standard();
        let d1 = ((option.spot / (option.strike * df)).ln() + 0.5 * sd * sd) / sd;
        option.spot * n.cdf(d1) - option.strike * df * n.cdf(d1 - sd)
    };
    let price = match option.kind {
        OptionKind::Call => call,
        OptionKind::Put => call - option.spot + option.strike * df,
    };
    Ok(PriceReport {
        price,
        method: Method::BsOracle,
        std_error: 0.0,
        diagnostics: Diagnostics::default(),
    })
}
