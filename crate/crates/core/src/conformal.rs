//! Split-conformal prediction sets for binary labels.
//!
//! Nonconformity is `1 - p(true label)`: `1 - p_yes` for positives and
//! `p_yes` for negatives. The threshold `q_hat` is the `k`-th smallest
//! calibration score with `k = ceil((n + 1)(1 - alpha))`, clamped to `n`.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalModel {
    pub alpha: f64,
    pub q_hat: f64,
    pub n_cal: usize,
}

/// A subset of {Yes, No}; may be empty when `q_hat < 0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PredictionSet {
    pub contains_yes: bool,
    pub contains_no: bool,
}

impl PredictionSet {
    pub fn size(&self) -> usize {
        usize::from(self.contains_yes) + usize::from(self.contains_no)
    }

    pub fn contains(&self, label: bool) -> bool {
        if label {
            self.contains_yes
        } else {
            self.contains_no
        }
    }
}

pub fn nonconformity(p_yes: f64, label: bool) -> f64 {
    if label {
        1.0 - p_yes
    } else {
        p_yes
    }
}

/// Rank of the conformal quantile, before clamping.
pub fn quantile_rank(n_cal: usize, alpha: f64) -> usize {
    // Subtracting a hair keeps exact products such as 20 * 0.9 from being
    // pushed up a rank by representation error.
    libm::ceil((n_cal as f64 + 1.0) * (1.0 - alpha) - 1e-9) as usize
}

pub fn conformal_calibrate(p_yes: &[f64], labels: &[bool], alpha: f64) -> Result<ConformalModel> {
    if p_yes.len() != labels.len() {
        return Err(Error::LengthMismatch { left: p_yes.len(), right: labels.len() });
    }
    if p_yes.is_empty() {
        return Err(Error::Empty { what: "conformal calibration" });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain { name: "alpha", value: alpha });
    }
    if let Some(&p) = p_yes.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain { name: "p_yes", value: p });
    }
    let mut scores: Vec<f64> = p_yes.iter().zip(labels).map(|(&p, &y)| nonconformity(p, y)).collect();
    scores.sort_by(f64::total_cmp);
    let n_cal = scores.len();
    let k = quantile_rank(n_cal, alpha).clamp(1, n_cal);
    Ok(ConformalModel { alpha, q_hat: scores[k - 1], n_cal })
}

pub fn conformal_predict(p_yes: f64, model: &ConformalModel) -> PredictionSet {
    PredictionSet { contains_yes: 1.0 - p_yes <= model.q_hat, contains_no: p_yes <= model.q_hat }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalReport {
    pub empirical_coverage: f64,
    pub mean_size: f64,
    pub singleton_fraction: f64,
    /// Target coverage minus empirical coverage.
    pub coverage_gap: f64,
}

pub fn conformal_report(sets: &[PredictionSet], labels: &[bool], alpha: f64) -> Result<ConformalReport> {
    if sets.len() != labels.len() {
        return Err(Error::LengthMismatch { left: sets.len(), right: labels.len() });
    }
    if sets.is_empty() {
        return Err(Error::Empty { what: "conformal report" });
    }
    let n = sets.len() as f64;
    let covered = sets.iter().zip(labels).filter(|(s, &y)| s.contains(y)).count() as f64;
    let empirical_coverage = covered / n;
    Ok(ConformalReport {
        empirical_coverage,
        mean_size: sets.iter().map(|s| s.size() as f64).sum::<f64>() / n,
        singleton_fraction: sets.iter().filter(|s| s.size() == 1).count() as f64 / n,
        coverage_gap: (1.0 - alpha) - empirical_coverage,
    })
}
