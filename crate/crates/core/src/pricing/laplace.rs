//! Laplace transform of the integrated CIR rate.
//!
//! For `dv = kappa (theta - v) dt + sigma_v sqrt(v) dW` and `T_t = int_0^t v`,
//! `E exp(-lambda T_t) = exp(-A(t) - B(t) v0)` with `gamma = sqrt(kappa^2 +
//! 2 sigma_v^2 lambda)`. The closed form is rewritten in terms of
//! `e = exp(-gamma t)` and `delta = gamma - kappa = 2 sigma_v^2 lambda /
//! (gamma + kappa)` so that neither large `t` nor small `sigma_v` loses
//! precision, and `sigma_v = 0` needs no special case.

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::time_change::CirParams;

fn expm1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        z * (1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0 * (1.0 + z / 5.0))))
    } else {
        z.exp() - 1.0
    }
}

/// `ln(1 - x) / (-x)`, equal to 1 at `x = 0`.
fn log1m_ratio(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        Complex64::new(1.0, 0.0) + x / 2.0 + x * x / 3.0 + x * x * x / 4.0
    } else {
        (Complex64::new(1.0, 0.0) - x).ln() / (-x)
    }
}

/// `ln E exp(-lambda T_t)`.
///
/// Valid while `Re(kappa^2 + 2 sigma_v^2 lambda) > 0`, which covers
/// `Re(lambda) >= 0` and a strip of negative real parts. There the principal
/// square root is continuous and equals `kappa` at `lambda = 0`, so the branch
/// is the one reached by continuity from the origin.
pub fn log_laplace_integrated_cir(params: &CirParams, lambda: Complex64, t: f64) -> Result<Complex64> {
    params.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain("t", format!("must be >= 0, got {t}")));
    }
    let CirParams {
        kappa,
        theta,
        sigma_v,
        v0,
    } = *params;
    let s2 = sigma_v * sigma_v;
    let radicand = kappa * kappa + 2.0 * s2 * lambda;
    if !(radicand.re > 0.0) || !lambda.is_finite() {
        return Err(domain(
            "lambda",
            format!("{lambda} outside the strip Re(kappa^2 + 2 sigma_v^2 lambda) > 0"),
        ));
    }
    let gamma = radicand.sqrt();
    // q = delta / sigma_v^2
    let q = 2.0 * lambda / (gamma + kappa);
    let one_minus_e = -expm1(-gamma * t);
    let x = s2 * q * one_minus_e / (2.0 * gamma);
    let denom = 2.0 * gamma - s2 * q * one_minus_e;
    let b = 2.0 * lambda * one_minus_e / denom;
    let a = 2.0 * kappa * theta * (q * t / 2.0 - q * one_minus_e / (2.0 * gamma) * log1m_ratio(x));
    Ok(-a - b * v0)
}

/// `E exp(-lambda T_t)` for the integrated CIR clock.
pub fn laplace_integrated_cir(params: &CirParams, lambda: Complex64, t: f64) -> Result<Complex64> {
    log_laplace_integrated_cir(params, lambda, t).map(|l| l.exp())
}

/// Clock `T_t` of the noise-free (`sigma_v = 0`) rate path.
pub fn deterministic_cir_clock(params: &CirParams, t: f64) -> f64 {
    let CirParams { kappa, theta, v0, .. } = *params;
    theta * t + (v0 - theta) * (-(-kappa * t).exp_m1()) / kappa
}
