//! Per-record scoring and dataset-level calibration metrics.

use alloc::vec::Vec;

use crate::math::{entropy_of, logistic, logit};
use crate::record::PredictionRecord;
use crate::{Error, Result};

/// Default number of equal-width confidence bins.
pub const DEFAULT_BINS: usize = 15;

/// Clamp applied to probabilities inside the NLL.
pub const NLL_EPSILON: f64 = 1e-12;

/// Derived view of a single binary prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPrediction {
    /// Log-odds of "Yes". Infinite for degenerate aggregated probabilities.
    pub margin: f64,
    /// Probability of "Yes".
    pub probability: f64,
    /// `max(p, 1 - p)`.
    pub confidence: f64,
    /// `p >= 0.5`; equipoise predicts "Yes".
    pub predicted: bool,
    /// Binary entropy of `probability`, nats.
    pub entropy: f64,
    pub label: bool,
}

impl ScoredPrediction {
    /// Scores a "Yes"-minus-"No" margin.
    pub fn from_margin(margin: f64, label: bool) -> Self {
        let probability = logistic(margin);
        Self {
            margin,
            probability,
            // logistic(|m|) equals max(p, 1-p) and keeps the confidence
            // ordering tied to |m| in floating point.
            confidence: logistic(margin.abs()),
            predicted: probability >= 0.5,
            entropy: entropy_of(probability),
            label,
        }
    }

    /// Scores an already aggregated probability.
    pub fn from_probability(probability: f64, label: bool) -> Self {
        Self {
            margin: logit(probability),
            probability,
            confidence: probability.max(1.0 - probability),
            predicted: probability >= 0.5,
            entropy: entropy_of(probability),
            label,
        }
    }

    pub fn correct(&self) -> bool {
        self.predicted == self.label
    }

    pub fn label_value(&self) -> f64 {
        if self.label {
            1.0
        } else {
            0.0
        }
    }
}

/// Single-pass score of a record.
pub fn score(record: &PredictionRecord) -> ScoredPrediction {
    ScoredPrediction::from_margin(record.margin(), record.is_positive())
}

/// One equal-width confidence bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Zero when the bin is empty.
    pub mean_confidence: f64,
    /// Zero when the bin is empty.
    pub accuracy: f64,
}

/// Partitions `[0, 1]` into `bins` equal widths by confidence.
///
/// Bins are left-closed and right-open except the last, which also takes
/// confidence exactly 1.
pub fn reliability_bins(preds: &[ScoredPrediction], bins: usize) -> Result<Vec<ReliabilityBin>> {
    if bins == 0 {
        return Err(Error::Domain { name: "bins", value: 0.0 });
    }
    let mut conf_sum = alloc::vec![0.0f64; bins];
    let mut correct = alloc::vec![0usize; bins];
    let mut count = alloc::vec![0usize; bins];
    for p in preds {
        let b = ((p.confidence * bins as f64) as usize).min(bins - 1);
        conf_sum[b] += p.confidence;
        correct[b] += usize::from(p.correct());
        count[b] += 1;
    }
    Ok((0..bins)
        .map(|b| {
            let (mean_confidence, accuracy) = if count[b] == 0 {
                (0.0, 0.0)
            } else {
                (conf_sum[b] / count[b] as f64, correct[b] as f64 / count[b] as f64)
            };
            ReliabilityBin {
                lower: b as f64 / bins as f64,
                upper: (b + 1) as f64 / bins as f64,
                count: count[b],
                mean_confidence,
                accuracy,
            }
        })
        .collect())
}

/// Count-weighted mean `|accuracy - confidence|` over bins. Zero for no data.
pub fn ece_from_bins(bins: &[ReliabilityBin]) -> f64 {
    let n: usize = bins.iter().map(|b| b.count).sum();
    if n == 0 {
        return 0.0;
    }
    bins.iter()
        .filter(|b| b.count > 0)
        .map(|b| b.count as f64 / n as f64 * (b.accuracy - b.mean_confidence).abs())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationMetrics {
    pub ece: f64,
    pub brier: f64,
    pub nll: f64,
    pub accuracy: f64,
}

/// ECE with the default 15 bins, Brier score, NLL and accuracy.
pub fn calibration_metrics(preds: &[ScoredPrediction]) -> Result<CalibrationMetrics> {
    calibration_metrics_with_bins(preds, DEFAULT_BINS)
}

pub fn calibration_metrics_with_bins(preds: &[ScoredPrediction], bins: usize) -> Result<CalibrationMetrics> {
    if preds.is_empty() {
        return Err(Error::Empty { what: "calibration metrics" });
    }
    let n = preds.len() as f64;
    let ece = ece_from_bins(&reliability_bins(preds, bins)?);
    let brier = preds
        .iter()
        .map(|p| {
            let d = p.probability - p.label_value();
            d * d
        })
        .sum::<f64>()
        / n;
    let nll = -preds
        .iter()
        .map(|p| {
            let q = p.probability.clamp(NLL_EPSILON, 1.0 - NLL_EPSILON);
            if p.label {
                libm::log(q)
            } else {
                libm::log1p(-q)
            }
        })
        .sum::<f64>()
        / n;
    let accuracy = preds.iter().filter(|p| p.correct()).count() as f64 / n;
    Ok(CalibrationMetrics { ece, brier, nll, accuracy })
}
