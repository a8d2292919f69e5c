//! Uncertainty-quantification evaluation for binary yes/no classifiers.
//!
//! Every routine here works on logged logits: a record carries the "Yes" and
//! "No" logits of a single forward pass, plus optional paraphrase, stochastic
//! pass and ensemble-member logits. From those the crate derives calibration
//! metrics, risk-coverage curves, split-conformal prediction sets, entropy
//! decompositions, paraphrase-flip statistics and an entropy abstention gate.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, image codecs
//! and the command-line tool live in the `uqbench` companion crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bridge;
pub mod conformal;
pub mod corruption;
mod error;
pub mod math;
pub mod metrics;
pub mod record;
pub mod rng;
pub mod selective;
pub mod stats;
pub mod synth;
pub mod temperature;
pub mod uncertainty;

pub use error::{Error, Result};
pub use metrics::{score, ScoredPrediction};
pub use record::PredictionRecord;
