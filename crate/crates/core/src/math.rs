//! Scalar helpers shared by every module. Natural logarithms throughout.

use crate::{Error, Result};

pub const LN_2: f64 = core::f64::consts::LN_2;

/// Logistic function, evaluated without overflow for large |x|.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `ln σ(x)` without forming σ(x).
#[inline]
pub fn log_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        -libm::log1p(libm::exp(-x))
    } else {
        x - libm::log1p(libm::exp(x))
    }
}

/// Log-odds of `p`; ±∞ at the endpoints.
#[inline]
pub fn logit(p: f64) -> f64 {
    libm::log(p) - libm::log1p(-p)
}

#[inline]
pub(crate) fn xlogx(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * libm::log(p)
    }
}

/// Binary entropy in nats with `0 ln 0 = 0`; no range check.
#[inline]
pub(crate) fn entropy_of(p: f64) -> f64 {
    -(xlogx(p) + xlogx(1.0 - p))
}

/// Binary entropy `-p ln p - (1-p) ln(1-p)` in nats.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain { name: "p", value: p });
    }
    Ok(entropy_of(p))
}

/// Standard normal upper tail `P(Z > z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

/// Rounds half away from zero's positive side: `floor(x + 0.5)`.
#[inline]
pub(crate) fn round_half_up(x: f64) -> f64 {
    libm::floor(x + 0.5)
}

#[inline]
pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
