//! CSV report rows. Column names follow the struct field names and are part
//! of the stable interface.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Writes CSV files into one directory and remembers their names.
pub struct ReportDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl ReportDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
        Ok(Self { dir: dir.to_owned(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(Error::io(&path))?;
        self.record(name);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(Error::io(&path))?;
        self.record(name);
        Ok(())
    }

    /// Notes a file written by other means.
    pub fn record(&mut self, name: &str) {
        self.written.push(name.to_owned());
    }

    pub fn outputs(&self) -> Vec<String> {
        self.written.clone()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub method: String,
    pub n: usize,
    pub accuracy: f64,
    pub ece: f64,
    pub brier: f64,
    pub nll: f64,
    pub aurc: f64,
    pub augrc: f64,
    pub cov_at_risk: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReliabilityRow {
    pub method: String,
    pub bin: usize,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_confidence: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub method: String,
    pub rank: usize,
    pub coverage: f64,
    pub selective_risk: f64,
    pub generalized_risk: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionRow {
    pub method: String,
    pub subset: &'static str,
    pub n: usize,
    pub mean_total: f64,
    pub mean_aleatoric: f64,
    pub mean_epistemic: f64,
    pub mi_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberRow {
    pub seed: i64,
    pub accuracy: f64,
    pub ece: f64,
    pub brier: f64,
    pub nll: f64,
    pub aurc: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DisagreementRow {
    pub seed_a: i64,
    pub seed_b: i64,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TemperatureFile {
    pub temperature: f64,
    pub calibration_size: usize,
    pub final_nll: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TempRow {
    pub protocol: String,
    pub temperature: f64,
    pub ece: f64,
    pub brier: f64,
    pub nll: f64,
    pub aurc: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformalRow {
    pub method: String,
    pub alpha: f64,
    pub target: f64,
    pub empirical: f64,
    pub q_hat: f64,
    pub mean_size: f64,
    pub singleton_pct: f64,
    pub coverage_gap: f64,
    pub n_cal: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BridgeRow {
    pub method: String,
    pub mode: &'static str,
    pub n: usize,
    pub skipped: usize,
    pub flip_pct: f64,
    #[serde(rename = "H_flip")]
    pub h_flip: f64,
    #[serde(rename = "H_stable")]
    pub h_stable: f64,
    #[serde(rename = "delta_H")]
    pub delta_h: f64,
    pub auroc: Option<f64>,
    pub p_value: Option<f64>,
    pub effect_size: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlipRow {
    pub id: String,
    pub flipped: u8,
    pub n_paraphrases: usize,
    pub mode: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCsvRow {
    pub coverage: f64,
    pub n: usize,
    pub tau: f64,
    pub error_pct: f64,
    pub flip_pct: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateRow {
    pub id: String,
    pub decision: &'static str,
    pub probability: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorruptionRow {
    pub image_path: String,
    pub kind: &'static str,
    pub severity: u8,
    pub output_path: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CiRow {
    pub method: String,
    pub metric: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairedRow {
    pub metric: String,
    pub method_a: String,
    pub method_b: String,
    pub estimate_a: f64,
    pub estimate_b: f64,
    pub p_value: f64,
}
