//! Single-parameter temperature scaling fitted by NLL minimization.
//!
//! The search is golden-section over `ln T` on `[ln 0.05, ln 20]`.

use crate::math::log_logistic;
use crate::metrics::ScoredPrediction;
use crate::{Error, Result};

pub const MIN_TEMPERATURE: f64 = 0.05;
pub const MAX_TEMPERATURE: f64 = 20.0;
pub const MAX_ITERATIONS: usize = 200;
/// Stop once the two golden-section probes differ by less than this.
pub const NLL_TOLERANCE: f64 = 1e-9;
/// Smallest calibration set accepted by [`fit_temperature`].
pub const MIN_CALIBRATION: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureModel {
    pub temperature: f64,
    pub calibration_size: usize,
    /// Mean NLL on the calibration margins at `temperature`.
    pub final_nll: f64,
    pub converged: bool,
}

impl TemperatureModel {
    /// The identity scaling.
    pub fn identity() -> Self {
        Self { temperature: 1.0, calibration_size: 0, final_nll: f64::NAN, converged: true }
    }

    pub fn apply(&self, margin: f64, label: bool) -> ScoredPrediction {
        apply_temperature(margin, label, self)
    }
}

/// Mean negative log-likelihood of labels under `σ(m / T)`.
pub fn temperature_nll(margins: &[f64], labels: &[bool], temperature: f64) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(labels)
        .map(|(&m, &y)| {
            let z = m / temperature;
            if y {
                -log_logistic(z)
            } else {
                -log_logistic(-z)
            }
        })
        .sum();
    total / margins.len() as f64
}

/// Fits `T*` on calibration margins and labels.
pub fn fit_temperature(margins: &[f64], labels: &[bool]) -> Result<TemperatureModel> {
    if margins.len() != labels.len() {
        return Err(Error::LengthMismatch { left: margins.len(), right: labels.len() });
    }
    if margins.len() < MIN_CALIBRATION {
        return Err(Error::TooFew { what: "temperature calibration", needed: MIN_CALIBRATION, got: margins.len() });
    }
    if labels.iter().all(|&y| y) || labels.iter().all(|&y| !y) {
        return Err(Error::SingleClass { what: "temperature calibration" });
    }
    if let Some(&m) = margins.iter().find(|m| !m.is_finite()) {
        return Err(Error::Domain { name: "margin", value: m });
    }

    let objective = |log_t: f64| temperature_nll(margins, labels, libm::exp(log_t));
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let (mut lo, mut hi) = (libm::log(MIN_TEMPERATURE), libm::log(MAX_TEMPERATURE));
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (objective(c), objective(d));
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        // Equal probes only signal a minimum once the bracket is narrow.
        if ((fc - fd).abs() < NLL_TOLERANCE && hi - lo < 1e-3) || hi - lo < 1e-12 {
            converged = true;
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d);
        }
    }
    let (mut log_t, mut best) = if fc <= fd { (c, fc) } else { (d, fd) };
    // The bracket endpoints are candidates too: the optimum may sit on a bound.
    for edge in [lo, hi] {
        let f = objective(edge);
        if f < best {
            log_t = edge;
            best = f;
        }
    }
    let mut temperature = libm::exp(log_t).clamp(MIN_TEMPERATURE, MAX_TEMPERATURE);
    // Never return something worse than leaving the margins alone.
    let identity = temperature_nll(margins, labels, 1.0);
    if identity < best {
        temperature = 1.0;
        best = identity;
    }
    Ok(TemperatureModel { temperature, calibration_size: margins.len(), final_nll: best, converged })
}

/// Scores `m / T`. The predicted label never changes.
pub fn apply_temperature(margin: f64, label: bool, model: &TemperatureModel) -> ScoredPrediction {
    ScoredPrediction::from_margin(margin / model.temperature, label)
}
