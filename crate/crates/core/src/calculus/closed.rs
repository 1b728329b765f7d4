//! Closed forms for Boyd powers and Calderon fractional powers.

use crate::error::{Error, Result};
use crate::model::{KernelSpec, Support};
use crate::specfun::{bessel_k_real, gamma_real, MAX_BESSEL_ORDER};
use num_complex::Complex64;
use std::f64::consts::PI;

fn check_boyd_alpha(alpha: f64) -> Result<()> {
    if !(alpha < 0.5) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Boyd operators are bounded for alpha < 1/2 only, got {alpha}"
        )));
    }
    Ok(())
}

/// `chi(0,1)(u) log(1/u)^(l-1) u^(-alpha) / (l-1)!`, the kernel of the
/// `l`-th power of the Boyd operator, over the dilation family.
pub fn boyd_power_kernel(alpha: f64, l: u32) -> Result<KernelSpec> {
    check_boyd_alpha(alpha)?;
    if l == 0 {
        return Err(Error::InvalidArgument("Boyd power needs l >= 1".into()));
    }
    let fact: f64 = (1..l).map(f64::from).product();
    let text = format!(
        "chi(0,1)(u) * log(1/u)^({}) * u^({}) / {fact}",
        l - 1,
        -alpha
    );
    let k = KernelSpec::parse(1, &text, Support::Full)?;
    Ok(k.with_label(format!("boyd(alpha={alpha})^{l}")))
}

/// `1 / ((1/2 - alpha) - i s)`.
pub fn boyd_symbol(alpha: f64, s: f64) -> Result<Complex64> {
    check_boyd_alpha(alpha)?;
    Ok(1.0 / Complex64::new(0.5 - alpha, -s))
}

/// `Q_alpha(t) = pi^(-1/2) Gamma(alpha)^(-1) |t|^(alpha - 1/2) K_(alpha - 1/2)(|t| / 2)`.
///
/// For `|t| < 1e-6` the small-argument limit is used when `alpha > 1/2`;
/// for `alpha <= 1/2` the function is singular there.
pub fn calderon_q(alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("Calderon power needs alpha > 0, got {alpha}")));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("t = {t}")));
    }
    let nu = alpha - 0.5;
    if nu.abs() > MAX_BESSEL_ORDER {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} needs a Bessel order beyond {MAX_BESSEL_ORDER}"
        )));
    }
    let pre = 1.0 / (PI.sqrt() * gamma_real(alpha)?);
    let x = t.abs();
    if x < 1e-6 {
        if nu <= 0.0 {
            return Err(Error::Singular(format!("Q_{alpha} diverges at t = 0")));
        }
        let mut v = gamma_real(nu)? * 2f64.powf(2.0 * nu - 1.0);
        if nu < 1.0 {
            // Gamma(-nu) = Gamma(1 - nu) / (-nu)
            v += -gamma_real(1.0 - nu)? / nu * 0.5 * (0.5 * x).powf(2.0 * nu);
        }
        return Ok(pre * v);
    }
    Ok(pre * x.powf(nu) * bessel_k_real(nu, 0.5 * x)?)
}

/// `K_alpha(u) = u^(-3/2) Q_alpha(log u)` for `u > 0`.
pub fn calderon_fractional_kernel(alpha: f64, u: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::InvalidArgument(format!("Calderon kernel needs u > 0, got {u}")));
    }
    Ok(u.powf(-1.5) * calderon_q(alpha, u.ln())?)
}
