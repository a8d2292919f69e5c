//! Entropy decomposition over multi-sample predictions and ensemble
//! aggregation.
//!
//! The same [`decompose`] serves MC-dropout passes and ensemble members: the
//! dropout mask plays the role of the member index.

use alloc::vec::Vec;

use crate::math::{entropy_of, logistic, mean};
use crate::metrics::{calibration_metrics, ScoredPrediction};
use crate::record::PredictionRecord;
use crate::selective::{aurc, risk_coverage};
use crate::{Error, Result};

/// Total = aleatoric + epistemic, all in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyDecomposition {
    pub mean_probability: f64,
    /// Entropy of the mean prediction.
    pub total: f64,
    /// Mean per-sample entropy.
    pub aleatoric: f64,
    /// Mutual information between the label and the sampled parameters.
    pub epistemic: f64,
    /// `epistemic / total`, zero when `total` is zero.
    pub ratio: f64,
}

/// Decomposes the predictive entropy of two or more probability samples.
pub fn decompose(probabilities: &[f64]) -> Result<UncertaintyDecomposition> {
    if probabilities.len() < 2 {
        return Err(Error::TooFew { what: "entropy decomposition", needed: 2, got: probabilities.len() });
    }
    if let Some(&p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain { name: "probability", value: p });
    }
    let first = probabilities[0];
    if probabilities.iter().all(|&p| p == first) {
        let h = entropy_of(first);
        return Ok(UncertaintyDecomposition {
            mean_probability: first,
            total: h,
            aleatoric: h,
            epistemic: 0.0,
            ratio: 0.0,
        });
    }
    let mean_probability = mean(probabilities);
    let total = entropy_of(mean_probability);
    let aleatoric = probabilities.iter().map(|&p| entropy_of(p)).sum::<f64>() / probabilities.len() as f64;
    let epistemic = total - aleatoric;
    let ratio = if total > 0.0 { epistemic / total } else { 0.0 };
    Ok(UncertaintyDecomposition { mean_probability, total, aleatoric, epistemic, ratio })
}

/// How ensemble members are combined into one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Mean of member probabilities.
    #[default]
    ProbabilityAverage,
    /// Logistic of the mean margin.
    LogitAverage,
    /// Fraction of members voting "Yes"; a tied vote predicts "Yes".
    MajorityVote,
}

/// Combines member margins into a single scored prediction.
pub fn aggregate(margins: &[f64], strategy: Aggregation, label: bool) -> Result<ScoredPrediction> {
    if margins.is_empty() {
        return Err(Error::Empty { what: "ensemble members" });
    }
    let k = margins.len() as f64;
    Ok(match strategy {
        Aggregation::ProbabilityAverage => {
            let p = margins.iter().map(|&m| logistic(m)).sum::<f64>() / k;
            ScoredPrediction::from_probability(p, label)
        }
        Aggregation::LogitAverage => ScoredPrediction::from_margin(margins.iter().sum::<f64>() / k, label),
        Aggregation::MajorityVote => {
            let yes = margins.iter().filter(|&&m| logistic(m) >= 0.5).count() as f64;
            ScoredPrediction::from_probability(yes / k, label)
        }
    })
}

/// Probabilities of the stochastic passes of a record.
pub fn pass_probabilities(record: &PredictionRecord) -> Vec<f64> {
    record.pass_margins().map(logistic).collect()
}

/// Probabilities of the ensemble members of a record.
pub fn member_probabilities(record: &PredictionRecord) -> Vec<f64> {
    record.member_margins().map(logistic).collect()
}

/// Pairwise disagreement rates between members.
///
/// `predictions[r][k]` is member `k`'s predicted label on record `r`.
pub fn disagreement_matrix(predictions: &[Vec<bool>]) -> Result<Vec<Vec<f64>>> {
    let m = predictions.first().map_or(0, Vec::len);
    for (row, p) in predictions.iter().enumerate() {
        if p.len() != m {
            return Err(Error::Ragged { row, expected: m, got: p.len() });
        }
    }
    let n = predictions.len();
    let mut out = alloc::vec![alloc::vec![0.0; m]; m];
    if n == 0 {
        return Ok(out);
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let d = predictions.iter().filter(|row| row[i] != row[j]).count() as f64 / n as f64;
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    Ok(out)
}

/// Single-model metrics of one ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberDiagnostics {
    pub seed: i64,
    pub accuracy: f64,
    pub ece: f64,
    pub brier: f64,
    pub nll: f64,
    pub aurc: f64,
}

/// Evaluates every ensemble member on its own.
pub fn member_diagnostics(records: &[PredictionRecord]) -> Result<Vec<MemberDiagnostics>> {
    let first = records.first().ok_or(Error::Empty { what: "member diagnostics" })?;
    if first.members.is_empty() {
        return Err(Error::MissingField { id: first.id.clone(), field: "members" });
    }
    for r in records {
        if r.members.len() != first.members.len() || r.members.iter().zip(&first.members).any(|(a, b)| a.seed != b.seed)
        {
            return Err(Error::MemberOrder { id: r.id.clone(), dataset: r.dataset.clone() });
        }
    }
    (0..first.members.len())
        .map(|k| {
            let preds: Vec<ScoredPrediction> = records
                .iter()
                .map(|r| {
                    let m = &r.members[k];
                    ScoredPrediction::from_margin(m.logit_yes - m.logit_no, r.is_positive())
                })
                .collect();
            let cal = calibration_metrics(&preds)?;
            let scores: Vec<f64> = preds.iter().map(|p| p.confidence).collect();
            let correct: Vec<bool> = preds.iter().map(|p| p.correct()).collect();
            Ok(MemberDiagnostics {
                seed: first.members[k].seed,
                accuracy: cal.accuracy,
                ece: cal.ece,
                brier: cal.brier,
                nll: cal.nll,
                aurc: aurc(&risk_coverage(&scores, &correct)?),
            })
        })
        .collect()
}

/// Per-member predicted labels, one row per record.
pub fn member_predictions(records: &[PredictionRecord]) -> Vec<Vec<bool>> {
    records.iter().map(|r| r.member_margins().map(|m| logistic(m) >= 0.5).collect()).collect()
}
