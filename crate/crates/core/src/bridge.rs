//! Paraphrase flips and their link to predictive uncertainty.
//!
//! A record flips when any paraphrase's single-pass prediction differs from
//! the reference prediction: the record's own single pass (canonical) or the
//! evaluated method's prediction (method-consistent). Paraphrases are always
//! scored single-pass.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math::logistic;
use crate::record::PredictionRecord;
use crate::stats::{auroc, mann_whitney};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlipMode {
    #[default]
    Canonical,
    MethodConsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlipRecord {
    pub id: String,
    pub flipped: bool,
    pub n_paraphrases: usize,
    pub mode: FlipMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlipLabels {
    pub flips: Vec<FlipRecord>,
    /// Records without paraphrases; they are labelled stable.
    pub without_paraphrases: usize,
}

fn single_pass_yes(logit_yes: f64, logit_no: f64) -> bool {
    logistic(logit_yes - logit_no) >= 0.5
}

/// Flip labels for every record.
///
/// `reference[i]` is the predicted label the paraphrases of `records[i]` are
/// compared against in method-consistent mode; it is ignored in canonical
/// mode.
pub fn flip_labels(records: &[PredictionRecord], mode: FlipMode, reference: Option<&[bool]>) -> Result<FlipLabels> {
    let reference = match (mode, reference) {
        (FlipMode::MethodConsistent, None) => {
            let id = records.first().map(|r| r.id.clone()).unwrap_or_default();
            return Err(Error::MissingReference { id });
        }
        (FlipMode::MethodConsistent, Some(r)) => {
            if r.len() != records.len() {
                return Err(Error::LengthMismatch { left: records.len(), right: r.len() });
            }
            Some(r)
        }
        (FlipMode::Canonical, _) => None,
    };
    let mut without_paraphrases = 0;
    let mut flips = Vec::with_capacity(records.len());
    for (i, record) in records.iter().enumerate() {
        let mut ids = BTreeSet::new();
        for p in &record.paraphrases {
            if !ids.insert(p.id.as_str()) {
                return Err(Error::ParaphraseIdCollision { id: record.id.clone(), paraphrase: p.id.clone() });
            }
        }
        let base = match reference {
            Some(r) => r[i],
            None => single_pass_yes(record.logit_yes, record.logit_no),
        };
        if record.paraphrases.is_empty() {
            without_paraphrases += 1;
        }
        let flipped = record.paraphrases.iter().any(|p| single_pass_yes(p.logit_yes, p.logit_no) != base);
        flips.push(FlipRecord { id: record.id.clone(), flipped, n_paraphrases: record.paraphrases.len(), mode });
    }
    Ok(FlipLabels { flips, without_paraphrases })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeReport {
    /// Records with at least one paraphrase.
    pub n: usize,
    /// Records excluded for lacking paraphrases.
    pub skipped: usize,
    pub flip_rate: f64,
    /// NaN when there are no flipped records.
    pub mean_entropy_flipped: f64,
    /// NaN when there are no stable records.
    pub mean_entropy_stable: f64,
    pub entropy_gap: f64,
    /// `None` when only one flip class is present.
    pub flip_auroc: Option<f64>,
    pub p_value: Option<f64>,
    pub effect_size: Option<f64>,
}

fn mean_or_nan(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Compares uncertainty scores of flipped and stable records.
///
/// `entropies[i]` belongs to `flips[i]`; higher means less certain. Records
/// with no paraphrases are left out of every statistic.
pub fn bridge_report(entropies: &[f64], flips: &[FlipRecord]) -> Result<BridgeReport> {
    if entropies.len() != flips.len() {
        return Err(Error::LengthMismatch { left: entropies.len(), right: flips.len() });
    }
    let mut flipped = Vec::new();
    let mut stable = Vec::new();
    let mut skipped = 0;
    for (&h, f) in entropies.iter().zip(flips) {
        if f.n_paraphrases == 0 {
            skipped += 1;
        } else if f.flipped {
            flipped.push(h);
        } else {
            stable.push(h);
        }
    }
    let n = flipped.len() + stable.len();
    if n == 0 {
        return Err(Error::MissingField {
            id: flips.first().map(|f| f.id.clone()).unwrap_or_default(),
            field: "paraphrases",
        });
    }
    let mean_entropy_flipped = mean_or_nan(&flipped);
    let mean_entropy_stable = mean_or_nan(&stable);
    let (flip_auroc, p_value, effect_size) = if flipped.is_empty() || stable.is_empty() {
        (None, None, None)
    } else {
        let scores: Vec<f64> = flipped.iter().chain(&stable).copied().collect();
        let labels: Vec<bool> = (0..n).map(|i| i < flipped.len()).collect();
        let test = mann_whitney(&flipped, &stable)?;
        (Some(auroc(&scores, &labels)?), Some(test.p_value), Some(test.effect_size))
    };
    Ok(BridgeReport {
        n,
        skipped,
        flip_rate: flipped.len() as f64 / n as f64,
        mean_entropy_flipped,
        mean_entropy_stable,
        entropy_gap: mean_entropy_flipped - mean_entropy_stable,
        flip_auroc,
        p_value,
        effect_size,
    })
}
