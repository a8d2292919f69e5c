//! Seeded synthetic prediction logs with known ground truth.
//!
//! Each record draws a true probability `p ~ Beta(a, b)`, a label
//! `y ~ Bernoulli(p)` and a base margin `m = T0 * logit(p)`. With `T0 = 1`
//! the single-pass probabilities are calibrated by construction; `T0 > 1`
//! makes them overconfident by exactly that temperature. Logits are written
//! as `(m, 0)` pairs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_distr::{Beta, Distribution};

use crate::math::logit;
use crate::record::{MemberLogits, Paraphrase, PredictionRecord};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Seeds assigned to the first five ensemble members; later members count
/// upward from 1000.
pub const MEMBER_SEEDS: [i64; 5] = [42, 123, 456, 789, 2024];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub seed: u64,
    pub dataset: String,
    /// Margins are the calibrated log-odds multiplied by this.
    pub temperature_distortion: f64,
    /// Beta(a, b) over true probabilities.
    pub prevalence_shape: (f64, f64),
    /// One additive margin bias per ensemble member; empty for no members.
    pub member_biases: Vec<f64>,
    pub member_noise: f64,
    pub pass_count: usize,
    pub pass_jitter: f64,
    pub paraphrase_count: usize,
    pub paraphrase_jitter: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            seed: 0,
            dataset: String::from("synthetic"),
            temperature_distortion: 1.0,
            prevalence_shape: (2.0, 2.0),
            member_biases: Vec::new(),
            member_noise: 0.0,
            pass_count: 0,
            pass_jitter: 0.0,
            paraphrase_count: 0,
            paraphrase_jitter: 0.0,
        }
    }
}

impl SynthConfig {
    fn check(&self) -> Result<()> {
        let (a, b) = self.prevalence_shape;
        for (name, v) in [("beta_a", a), ("beta_b", b), ("temperature_distortion", self.temperature_distortion)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain { name, value: v });
            }
        }
        for (name, v) in [
            ("member_noise", self.member_noise),
            ("pass_jitter", self.pass_jitter),
            ("paraphrase_jitter", self.paraphrase_jitter),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain { name, value: v });
            }
        }
        if let Some(&b) = self.member_biases.iter().find(|b| !b.is_finite()) {
            return Err(Error::Domain { name: "member_bias", value: b });
        }
        Ok(())
    }
}

pub fn member_seed(k: usize) -> i64 {
    MEMBER_SEEDS.get(k).copied().unwrap_or(1000 + k as i64)
}

/// Generates `config.n` records. Identical configs give identical output.
pub fn generate(config: &SynthConfig) -> Result<Vec<PredictionRecord>> {
    config.check()?;
    let (a, b) = config.prevalence_shape;
    let beta = Beta::new(a, b).map_err(|_| Error::Domain { name: "beta", value: a.min(b) })?;
    let mut rng = SeededRng::new(config.seed);
    let mut records = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let p: f64 = beta.sample(&mut rng);
        let p = p.clamp(1e-12, 1.0 - 1e-12);
        let label = u8::from(rng.bernoulli(p));
        let m = config.temperature_distortion * logit(p);
        let id = format!("syn-{i:06}");
        let mut record = PredictionRecord::new(id.clone(), m, 0.0, label);
        record.dataset = config.dataset.clone();
        record.paraphrases = (0..config.paraphrase_count)
            .map(|j| Paraphrase {
                id: format!("{id}-p{j}"),
                logit_yes: rng.normal(m, config.paraphrase_jitter),
                logit_no: 0.0,
            })
            .collect();
        record.members = config
            .member_biases
            .iter()
            .enumerate()
            .map(|(k, bias)| MemberLogits {
                seed: member_seed(k),
                logit_yes: rng.normal(m + bias, config.member_noise),
                logit_no: 0.0,
            })
            .collect();
        record.passes = (0..config.pass_count).map(|_| [rng.normal(m, config.pass_jitter), 0.0]).collect();
        records.push(record);
    }
    Ok(records)
}
