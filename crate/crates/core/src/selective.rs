//! Selective prediction: risk-coverage curves, their summary areas, the
//! joint entropy-threshold sweep and the entropy abstention gate.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math::{round_half_up, LN_2};
use crate::metrics::ScoredPrediction;
use crate::uncertainty::UncertaintyDecomposition;
use crate::{Error, Result};

/// One acceptance prefix of a risk-coverage curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub coverage: f64,
    /// Error rate among the retained records.
    pub selective_risk: f64,
    /// `selective_risk * coverage`: errors accepted per record overall.
    pub generalized_risk: f64,
    /// Score of the last retained record.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskCoverageCurve {
    /// One point per prefix, most confident first.
    pub points: Vec<CurvePoint>,
    pub n: usize,
}

/// Builds the curve by retaining records in decreasing `scores` order.
/// Equal scores keep their input order.
pub fn risk_coverage(scores: &[f64], correct: &[bool]) -> Result<RiskCoverageCurve> {
    risk_coverage_with_tiebreak(scores, scores, correct)
}

/// Like [`risk_coverage`], but equal `scores` are ordered by decreasing
/// `tiebreak` before falling back to input order.
///
/// Used when the score is a rounded image of an exact quantity, e.g. a
/// saturated probability whose margin still separates records.
pub fn risk_coverage_with_tiebreak(scores: &[f64], tiebreak: &[f64], correct: &[bool]) -> Result<RiskCoverageCurve> {
    if scores.len() != correct.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: correct.len() });
    }
    if tiebreak.len() != scores.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: tiebreak.len() });
    }
    if scores.is_empty() {
        return Err(Error::Empty { what: "risk-coverage curve" });
    }
    let desc = |a: f64, b: f64| b.partial_cmp(&a).unwrap_or(Ordering::Equal);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| desc(scores[i], scores[j]).then_with(|| desc(tiebreak[i], tiebreak[j])));
    let n = scores.len();
    let mut errors = 0usize;
    let points = order
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            errors += usize::from(!correct[i]);
            let retained = k + 1;
            let coverage = retained as f64 / n as f64;
            let selective_risk = errors as f64 / retained as f64;
            CurvePoint { coverage, selective_risk, generalized_risk: selective_risk * coverage, threshold: scores[i] }
        })
        .collect();
    Ok(RiskCoverageCurve { points, n })
}

/// Ranks single-pass predictions by confidence, separating saturated
/// confidences by |margin|.
pub fn confidence_curve(preds: &[ScoredPrediction]) -> Result<RiskCoverageCurve> {
    let scores: Vec<f64> = preds.iter().map(|p| p.confidence).collect();
    let tiebreak: Vec<f64> = preds.iter().map(|p| p.margin.abs()).collect();
    let correct: Vec<bool> = preds.iter().map(ScoredPrediction::correct).collect();
    risk_coverage_with_tiebreak(&scores, &tiebreak, &correct)
}

/// Area under the risk-coverage curve: mean selective risk over prefixes.
pub fn aurc(curve: &RiskCoverageCurve) -> f64 {
    mean_of(curve, |p| p.selective_risk)
}

/// Area under the generalized risk-coverage curve.
pub fn augrc(curve: &RiskCoverageCurve) -> f64 {
    mean_of(curve, |p| p.generalized_risk)
}

fn mean_of(curve: &RiskCoverageCurve, f: impl Fn(&CurvePoint) -> f64) -> f64 {
    if curve.points.is_empty() {
        return 0.0;
    }
    curve.points.iter().map(f).sum::<f64>() / curve.points.len() as f64
}

/// Largest prefix coverage whose selective risk is at most `alpha`; zero
/// when no prefix qualifies.
pub fn coverage_at_risk(curve: &RiskCoverageCurve, alpha: f64) -> f64 {
    curve.points.iter().filter(|p| p.selective_risk <= alpha).map(|p| p.coverage).fold(0.0, f64::max)
}

/// How a coverage fraction becomes a retained record count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RetainRule {
    /// `floor(c * n + 0.5)`.
    #[default]
    RoundHalfUp,
    /// `ceil(c * n)`, ignoring float noise below 1e-9.
    Ceil,
}

impl RetainRule {
    pub fn count(self, coverage: f64, n: usize) -> usize {
        let exact = coverage * n as f64;
        let k = match self {
            RetainRule::RoundHalfUp => round_half_up(exact),
            RetainRule::Ceil => libm::ceil(exact - 1e-9),
        };
        (k.max(0.0) as usize).min(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub coverage: f64,
    pub n_retained: usize,
    /// Largest retained entropy.
    pub tau: f64,
    pub error_rate: f64,
    pub flip_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Grid values that retained no records.
    pub skipped: Vec<f64>,
}

/// Retains the lowest-entropy records at each grid coverage and reports the
/// error and flip rates of the retained set.
pub fn joint_threshold_sweep(
    entropies: &[f64],
    correct: &[bool],
    flipped: &[bool],
    coverage_grid: &[f64],
    rule: RetainRule,
) -> Result<SweepTable> {
    let n = entropies.len();
    for len in [correct.len(), flipped.len()] {
        if len != n {
            return Err(Error::LengthMismatch { left: n, right: len });
        }
    }
    if let Some(&c) = coverage_grid.iter().find(|c| !(**c > 0.0 && **c <= 1.0)) {
        return Err(Error::Domain { name: "coverage", value: c });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| entropies[i].partial_cmp(&entropies[j]).unwrap_or(Ordering::Equal));
    let mut table = SweepTable::default();
    for &coverage in coverage_grid {
        let k = rule.count(coverage, n);
        if k == 0 {
            table.skipped.push(coverage);
            continue;
        }
        let kept = &order[..k];
        let errors = kept.iter().filter(|&&i| !correct[i]).count();
        let flips = kept.iter().filter(|&&i| flipped[i]).count();
        table.rows.push(SweepRow {
            coverage,
            n_retained: k,
            tau: entropies[kept[k - 1]],
            error_rate: errors as f64 / k as f64,
            flip_rate: flips as f64 / k as f64,
        });
    }
    Ok(table)
}

/// Inference tier of the abstention gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    /// One deterministic forward pass.
    SinglePass,
    /// Mean over stochastic passes.
    MultiPass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig {
    pub entropy_threshold: f64,
    pub tier: Tier,
}

impl GateConfig {
    pub fn new(entropy_threshold: f64, tier: Tier) -> Result<Self> {
        if !(0.0..=LN_2).contains(&entropy_threshold) {
            return Err(Error::Domain { name: "entropy_threshold", value: entropy_threshold });
        }
        Ok(Self { entropy_threshold, tier })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Answer,
    Abstain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOutcome {
    pub decision: Decision,
    pub probability: f64,
    pub entropy: f64,
}

/// Anything the gate can judge: a probability of "Yes" and its entropy.
pub trait GateInput {
    fn gate_probability(&self) -> f64;
    fn gate_entropy(&self) -> f64;
}

impl GateInput for ScoredPrediction {
    fn gate_probability(&self) -> f64 {
        self.probability
    }
    fn gate_entropy(&self) -> f64 {
        self.entropy
    }
}

impl GateInput for UncertaintyDecomposition {
    fn gate_probability(&self) -> f64 {
        self.mean_probability
    }
    fn gate_entropy(&self) -> f64 {
        self.total
    }
}

/// Abstains iff the predictive entropy strictly exceeds the threshold.
pub fn abstain<P: GateInput + ?Sized>(prediction: &P, config: &GateConfig) -> GateOutcome {
    let entropy = prediction.gate_entropy();
    let decision = if entropy > config.entropy_threshold { Decision::Abstain } else { Decision::Answer };
    GateOutcome { decision, probability: prediction.gate_probability(), entropy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::decompose;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn three_point_example() {
        let c = risk_coverage(&[0.9, 0.8, 0.7], &[true, true, false]).unwrap();
        assert_eq!(c.points[1].coverage, 2.0 / 3.0);
        assert_eq!(c.points[1].selective_risk, 0.0);
        assert_eq!(c.points[2].coverage, 1.0);
        assert_abs_diff_eq!(c.points[2].selective_risk, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(aurc(&c), 1.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coverage_at_risk(&c, 0.05), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn all_correct_and_all_wrong() {
        let s = [0.3, 0.9, 0.5, 0.7];
        let good = risk_coverage(&s, &[true; 4]).unwrap();
        assert!(good.points.iter().all(|p| p.selective_risk == 0.0));
        assert_eq!(aurc(&good), 0.0);
        assert_eq!(augrc(&good), 0.0);
        assert_eq!(coverage_at_risk(&good, 0.05), 1.0);

        let bad = risk_coverage(&s, &[false; 4]).unwrap();
        assert!(bad.points.iter().all(|p| p.selective_risk == 1.0 && p.generalized_risk == p.coverage));
        assert_eq!(aurc(&bad), 1.0);
        assert_eq!(coverage_at_risk(&bad, 0.05), 0.0);
        // mean of k/n for k = 1..n is (n + 1) / 2n
        assert_abs_diff_eq!(augrc(&bad), 5.0 / 8.0, epsilon = 1e-15);
        let two = risk_coverage(&[0.1, 0.2], &[false, false]).unwrap();
        assert_abs_diff_eq!(augrc(&two), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn curve_errors_and_ties() {
        assert!(matches!(risk_coverage(&[0.1], &[true, false]), Err(Error::LengthMismatch { .. })));
        assert!(risk_coverage(&[], &[]).is_err());
        // ties keep input order: the wrong record comes first
        let c = risk_coverage(&[0.5, 0.5], &[false, true]).unwrap();
        assert_eq!(c.points[0].selective_risk, 1.0);
        let c = risk_coverage_with_tiebreak(&[0.5, 0.5], &[1.0, 2.0], &[false, true]).unwrap();
        assert_eq!(c.points[0].selective_risk, 0.0);
    }

    #[test]
    fn retain_rules() {
        assert_eq!(RetainRule::RoundHalfUp.count(0.9, 861), 775);
        assert_eq!(RetainRule::RoundHalfUp.count(0.5, 861), 431);
        assert_eq!(RetainRule::RoundHalfUp.count(0.4, 861), 344);
        assert_eq!(RetainRule::Ceil.count(0.4, 861), 345);
        assert_eq!(RetainRule::Ceil.count(0.3, 1000), 300);
        assert_eq!(RetainRule::Ceil.count(1.0, 861), 861);
    }

    #[test]
    fn sweep_full_coverage_matches_overall_rates() {
        let entropies = [0.1, LN_2, 0.4, 0.2];
        let correct = [true, false, true, false];
        let flipped = [false, true, true, false];
        let t =
            joint_threshold_sweep(&entropies, &correct, &flipped, &[1.0, 0.5, 0.1], RetainRule::RoundHalfUp).unwrap();
        assert_eq!(t.rows[0].tau, LN_2);
        assert_eq!(t.rows[0].error_rate, 0.5);
        assert_eq!(t.rows[0].flip_rate, 0.5);
        assert_eq!(t.rows[1].n_retained, 2);
        assert_eq!(t.rows[1].tau, 0.2);
        assert_eq!(t.skipped, vec![0.1]);
        assert!(joint_threshold_sweep(&entropies, &correct, &flipped, &[1.5], RetainRule::Ceil).is_err());
        assert!(joint_threshold_sweep(&entropies, &correct[..3], &flipped, &[1.0], RetainRule::Ceil).is_err());
    }

    #[test]
    fn gate_decisions() {
        let cfg = GateConfig::new(0.53, Tier::SinglePass).unwrap();
        let p = ScoredPrediction::from_probability(0.5, true);
        let hot = ScoredPrediction { entropy: 0.70, ..p };
        assert_eq!(abstain(&hot, &cfg).decision, Decision::Abstain);
        let cold = ScoredPrediction::from_probability(1.0, true);
        assert_eq!(abstain(&cold, &GateConfig::new(0.0, Tier::SinglePass).unwrap()).decision, Decision::Answer);
        let edge = ScoredPrediction { entropy: 0.53, ..p };
        assert_eq!(abstain(&edge, &cfg).decision, Decision::Answer);

        let multi = GateConfig::new(0.3, Tier::MultiPass).unwrap();
        let d = decompose(&[0.1, 0.9]).unwrap();
        let out = abstain(&d, &multi);
        assert_eq!(out.decision, Decision::Abstain);
        assert_eq!(out.probability, 0.5);

        assert!(GateConfig::new(0.8, Tier::SinglePass).is_err());
        assert!(GateConfig::new(-0.1, Tier::SinglePass).is_err());
    }
}
