//! Registry of the uncertainty methods, each mapped onto core calls.

use std::fmt;

use clap::ValueEnum;
use serde::Serialize;
use uqbench_core::metrics::ScoredPrediction;
use uqbench_core::temperature::TemperatureModel;
use uqbench_core::uncertainty::{
    aggregate, decompose, member_probabilities, pass_probabilities, Aggregation, UncertaintyDecomposition,
};
use uqbench_core::{score, Error as CoreError, PredictionRecord};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Single pass; ranks by confidence.
    Softmax,
    /// Single pass; ranks by |margin|.
    Margin,
    /// Single pass with a fitted temperature.
    Temp,
    /// Mean over stochastic passes.
    Mcdrop,
    /// Aggregate over ensemble members.
    Ensemble,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Softmax => "softmax",
            Method::Margin => "margin",
            Method::Temp => "temp",
            Method::Mcdrop => "mcdrop",
            Method::Ensemble => "ensemble",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Prob,
    Logit,
    Vote,
}

impl From<Strategy> for Aggregation {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Prob => Aggregation::ProbabilityAverage,
            Strategy::Logit => Aggregation::LogitAverage,
            Strategy::Vote => Aggregation::MajorityVote,
        }
    }
}

/// A method's view of one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodScore {
    pub prediction: ScoredPrediction,
    /// Higher means more willing to answer.
    pub rank_score: f64,
    /// Separates equal `rank_score`s.
    pub tiebreak: f64,
    /// Higher means less certain; used by the flip analysis.
    pub uncertainty: f64,
    pub decomposition: Option<UncertaintyDecomposition>,
}

/// Configured method, ready to score records.
#[derive(Debug, Clone, Copy)]
pub struct Scorer {
    pub method: Method,
    pub strategy: Strategy,
    pub temperature: Option<TemperatureModel>,
}

impl Scorer {
    pub fn new(method: Method, strategy: Strategy) -> Self {
        Self { method, strategy, temperature: None }
    }

    pub fn label(&self) -> String {
        match self.method {
            Method::Ensemble => format!(
                "ensemble-{}",
                self.strategy.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
            ),
            m => m.name().to_owned(),
        }
    }

    /// Fails with a typed error naming the first record that lacks what the
    /// method needs.
    pub fn check(&self, records: &[PredictionRecord]) -> Result<()> {
        let missing = |r: &PredictionRecord, field| CoreError::MissingField { id: r.id.clone(), field };
        match self.method {
            Method::Mcdrop => {
                if let Some(r) = records.iter().find(|r| r.passes.len() < 2) {
                    return Err(missing(r, "passes (at least 2)").into());
                }
            }
            Method::Ensemble => {
                if let Some(r) = records.iter().find(|r| r.members.is_empty()) {
                    return Err(missing(r, "members").into());
                }
            }
            Method::Temp if self.temperature.is_none() => {
                return Err(crate::Error::Usage("temp method needs a fitted temperature".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn score(&self, record: &PredictionRecord) -> Result<MethodScore> {
        let label = record.is_positive();
        let single = |prediction: ScoredPrediction, rank_score: f64| MethodScore {
            prediction,
            rank_score,
            tiebreak: prediction.margin.abs(),
            uncertainty: prediction.entropy,
            decomposition: None,
        };
        Ok(match self.method {
            Method::Softmax => {
                let p = score(record);
                single(p, p.confidence)
            }
            Method::Margin => {
                let p = score(record);
                MethodScore { uncertainty: -p.margin.abs(), ..single(p, p.margin.abs()) }
            }
            Method::Temp => {
                let model = self.temperature.unwrap_or_else(TemperatureModel::identity);
                let p = model.apply(record.margin(), label);
                single(p, p.confidence)
            }
            Method::Mcdrop => {
                let d = decompose(&pass_probabilities(record))
                    .map_err(|_| CoreError::MissingField { id: record.id.clone(), field: "passes (at least 2)" })?;
                let p = ScoredPrediction::from_probability(d.mean_probability, label);
                MethodScore { decomposition: Some(d), ..single(p, p.confidence) }
            }
            Method::Ensemble => {
                let margins: Vec<f64> = record.member_margins().collect();
                let p = aggregate(&margins, self.strategy.into(), label)
                    .map_err(|_| CoreError::MissingField { id: record.id.clone(), field: "members" })?;
                let probs = member_probabilities(record);
                let decomposition = if probs.len() >= 2 { Some(decompose(&probs)?) } else { None };
                MethodScore { decomposition, ..single(p, p.confidence) }
            }
        })
    }

    pub fn score_all(&self, records: &[PredictionRecord]) -> Result<Vec<MethodScore>> {
        self.check(records)?;
        records.iter().map(|r| self.score(r)).collect()
    }
}
