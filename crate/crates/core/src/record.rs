//! Prediction records: the logged logits every other module consumes.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corruption::CorruptionKind;
use crate::math::round_half_up;
use crate::rng::SeededRng;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Logits of one paraphrased question.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Paraphrase {
    pub id: String,
    pub logit_yes: f64,
    pub logit_no: f64,
}

/// Logits of one ensemble member, identified by its training seed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MemberLogits {
    pub seed: i64,
    pub logit_yes: f64,
    pub logit_no: f64,
}

/// Corruption applied to the image behind a record. Metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CorruptionTag {
    pub kind: CorruptionKind,
    pub severity: u8,
}

/// One yes/no question instance.
///
/// `passes` holds `[logit_yes, logit_no]` pairs from stochastic forward
/// passes; `members` holds ensemble logits in a fixed seed order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PredictionRecord {
    pub id: String,
    /// Empty when the source line has no tag.
    #[cfg_attr(feature = "serde", serde(default))]
    pub dataset: String,
    pub logit_yes: f64,
    pub logit_no: f64,
    pub label: u8,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Vec::is_empty"))]
    pub paraphrases: Vec<Paraphrase>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Vec::is_empty"))]
    pub passes: Vec<[f64; 2]>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Vec::is_empty"))]
    pub members: Vec<MemberLogits>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub corruption: Option<CorruptionTag>,
}

impl PredictionRecord {
    /// A record with only the single-pass logits set.
    pub fn new(id: impl Into<String>, logit_yes: f64, logit_no: f64, label: u8) -> Self {
        Self {
            id: id.into(),
            dataset: String::new(),
            logit_yes,
            logit_no,
            label,
            paraphrases: Vec::new(),
            passes: Vec::new(),
            members: Vec::new(),
            corruption: None,
        }
    }

    pub fn margin(&self) -> f64 {
        self.logit_yes - self.logit_no
    }

    pub fn is_positive(&self) -> bool {
        self.label == 1
    }

    pub fn pass_margins(&self) -> impl Iterator<Item = f64> + '_ {
        self.passes.iter().map(|[y, n]| y - n)
    }

    pub fn member_margins(&self) -> impl Iterator<Item = f64> + '_ {
        self.members.iter().map(|m| m.logit_yes - m.logit_no)
    }

    /// Checks the per-record invariants: finite logits and a 0/1 label.
    pub fn validate(&self) -> Result<()> {
        let non_finite = |field| Error::NonFinite { id: self.id.clone(), field };
        if !self.logit_yes.is_finite() {
            return Err(non_finite("logit_yes"));
        }
        if !self.logit_no.is_finite() {
            return Err(non_finite("logit_no"));
        }
        if self.label > 1 {
            return Err(Error::InvalidLabel { id: self.id.clone(), label: self.label });
        }
        if self.paraphrases.iter().any(|p| !p.logit_yes.is_finite() || !p.logit_no.is_finite()) {
            return Err(non_finite("paraphrases"));
        }
        if self.passes.iter().flatten().any(|z| !z.is_finite()) {
            return Err(non_finite("passes"));
        }
        if self.members.iter().any(|m| !m.logit_yes.is_finite() || !m.logit_no.is_finite()) {
            return Err(non_finite("members"));
        }
        Ok(())
    }

    fn member_seeds(&self) -> impl Iterator<Item = i64> + '_ {
        self.members.iter().map(|m| m.seed)
    }
}

/// Validates a whole file's worth of records.
///
/// `locations[i]` is what error messages report for record `i` (typically its
/// line number); when `None`, 1-based positions are used.
pub fn validate_records(records: &[PredictionRecord], locations: Option<&[usize]>) -> Result<()> {
    let at = |i: usize| locations.and_then(|l| l.get(i).copied()).unwrap_or(i + 1);
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    // dataset tag -> index of the first record carrying members
    let mut member_order: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, record) in records.iter().enumerate() {
        record.validate()?;
        if let Some(&first) = seen.get(record.id.as_str()) {
            return Err(Error::DuplicateId { id: record.id.clone(), first: at(first), second: at(i) });
        }
        seen.insert(&record.id, i);
        if record.members.is_empty() {
            continue;
        }
        match member_order.get(record.dataset.as_str()) {
            Some(&reference) => {
                if !records[reference].member_seeds().eq(record.member_seeds()) {
                    return Err(Error::MemberOrder { id: record.id.clone(), dataset: record.dataset.clone() });
                }
            }
            None => {
                member_order.insert(&record.dataset, i);
            }
        }
    }
    Ok(())
}

/// Records whose dataset tag equals `dataset`.
pub fn filter_dataset<'a>(records: &'a [PredictionRecord], dataset: &str) -> Vec<&'a PredictionRecord> {
    records.iter().filter(|r| r.dataset == dataset).collect()
}

/// Records carrying the given corruption kind; `None` selects clean records.
pub fn filter_corruption(records: &[PredictionRecord], kind: Option<CorruptionKind>) -> Vec<&PredictionRecord> {
    records.iter().filter(|r| r.corruption.map(|c| c.kind) == kind).collect()
}

/// How to carve a calibration partition out of an evaluation file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub calibration_fraction: f64,
    pub minimum_calibration: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { calibration_fraction: 0.15, minimum_calibration: 20, seed: 0 }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// `max(round(fraction * n), minimum)`.
    pub fn calibration_size(&self, n: usize) -> usize {
        let target = round_half_up(self.calibration_fraction * n as f64) as usize;
        target.max(self.minimum_calibration)
    }
}

/// Index partition produced by [`split_indices`]; both halves ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub calibration: Vec<usize>,
    pub evaluation: Vec<usize>,
}

/// Seeded shuffle of `0..n`, calibration takes the shuffled prefix.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    if n == 0 {
        return Err(Error::Empty { what: "split" });
    }
    if !(spec.calibration_fraction > 0.0 && spec.calibration_fraction < 1.0) {
        return Err(Error::Domain { name: "calibration_fraction", value: spec.calibration_fraction });
    }
    let calibration = spec.calibration_size(n);
    if calibration >= n {
        return Err(Error::SplitTooSmall { n, calibration });
    }
    let mut order: Vec<usize> = (0..n).collect();
    SeededRng::new(spec.seed).shuffle(&mut order);
    let mut cal = order[..calibration].to_vec();
    let mut eval = order[calibration..].to_vec();
    cal.sort_unstable();
    eval.sort_unstable();
    Ok(SplitIndices { calibration: cal, evaluation: eval })
}

/// Splits records into (calibration, evaluation), preserving input order
/// inside each partition.
pub fn split_calibration(
    records: &[PredictionRecord],
    spec: &SplitSpec,
) -> Result<(Vec<PredictionRecord>, Vec<PredictionRecord>)> {
    let idx = split_indices(records.len(), spec)?;
    let pick = |ix: &[usize]| ix.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    Ok((pick(&idx.calibration), pick(&idx.evaluation)))
}

/// Fails with a typed error naming the first record lacking `field`.
pub fn require<'a, F>(records: &'a [PredictionRecord], field: &'static str, has: F) -> Result<()>
where
    F: Fn(&'a PredictionRecord) -> bool,
{
    match records.iter().find(|r| !has(r)) {
        Some(r) => Err(Error::MissingField { id: r.id.to_string(), field }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn records(n: usize) -> Vec<PredictionRecord> {
        (0..n).map(|i| PredictionRecord::new(format!("q{i}"), i as f64 * 0.1, 0.0, (i % 2) as u8)).collect()
    }

    #[test]
    fn split_sizes() {
        let (cal, eval) = split_calibration(&records(200), &SplitSpec::with_seed(3)).unwrap();
        assert_eq!((cal.len(), eval.len()), (30, 170));
        let (cal, eval) = split_calibration(&records(100), &SplitSpec::with_seed(3)).unwrap();
        assert_eq!((cal.len(), eval.len()), (20, 80));
        assert!(matches!(
            split_calibration(&records(20), &SplitSpec::with_seed(3)),
            Err(Error::SplitTooSmall { n: 20, calibration: 20 })
        ));
        assert!(split_calibration(&[], &SplitSpec::default()).is_err());
    }

    #[test]
    fn split_is_deterministic_and_exhaustive() {
        let recs = records(157);
        let a = split_indices(recs.len(), &SplitSpec::with_seed(11)).unwrap();
        let b = split_indices(recs.len(), &SplitSpec::with_seed(11)).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.calibration.iter().chain(&a.evaluation).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..157).collect::<Vec<_>>());
        let c = split_indices(recs.len(), &SplitSpec::with_seed(12)).unwrap();
        assert_ne!(a.calibration, c.calibration);
    }

    #[test]
    fn validation_catches_bad_records() {
        let mut recs = records(3);
        assert!(validate_records(&recs, None).is_ok());
        recs[1].logit_no = f64::NAN;
        assert!(matches!(validate_records(&recs, None), Err(Error::NonFinite { field: "logit_no", .. })));
        recs[1].logit_no = 0.0;
        recs[2].label = 2;
        assert!(matches!(validate_records(&recs, None), Err(Error::InvalidLabel { .. })));
        recs[2].label = 1;
        recs[2].id = "q0".into();
        assert_eq!(
            validate_records(&recs, Some(&[4, 5, 9])),
            Err(Error::DuplicateId { id: "q0".into(), first: 4, second: 9 })
        );
    }

    #[test]
    fn member_order_must_agree_within_dataset() {
        let mut recs = records(2);
        let m = |seed| MemberLogits { seed, logit_yes: 0.0, logit_no: 0.0 };
        recs[0].members = vec![m(42), m(123)];
        recs[1].members = vec![m(123), m(42)];
        assert!(matches!(validate_records(&recs, None), Err(Error::MemberOrder { .. })));
        recs[1].dataset = "other".into();
        assert!(validate_records(&recs, None).is_ok());
    }

    #[test]
    fn filters_do_not_mutate() {
        let mut recs = records(4);
        recs[1].dataset = "padchest".into();
        recs[2].corruption = Some(CorruptionTag { kind: CorruptionKind::Contrast, severity: 3 });
        let before = recs.clone();
        assert_eq!(filter_dataset(&recs, "padchest").len(), 1);
        assert_eq!(filter_corruption(&recs, Some(CorruptionKind::Contrast)).len(), 1);
        assert_eq!(filter_corruption(&recs, None).len(), 3);
        assert_eq!(recs, before);
    }

    #[test]
    fn require_names_missing_field() {
        let recs = records(2);
        assert_eq!(
            require(&recs, "members", |r| !r.members.is_empty()),
            Err(Error::MissingField { id: "q0".into(), field: "members" })
        );
    }
}
