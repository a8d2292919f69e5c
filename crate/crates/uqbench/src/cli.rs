//! Command-line front-end. Every subcommand writes its reports plus a
//! `manifest.json` into `--out-dir`.

use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use uqbench_core::bridge::{bridge_report, flip_labels, FlipMode};
use uqbench_core::conformal::{conformal_calibrate, conformal_predict, conformal_report};
use uqbench_core::corruption::{apply_corruption, CorruptionKind, CorruptionSpec, Severity};
use uqbench_core::metrics::{calibration_metrics_with_bins, reliability_bins, ScoredPrediction, DEFAULT_BINS};
use uqbench_core::record::{split_indices, SplitSpec};
use uqbench_core::selective::{
    abstain, augrc, aurc, coverage_at_risk, joint_threshold_sweep, risk_coverage_with_tiebreak, Decision, GateConfig,
    RetainRule, RiskCoverageCurve, Tier,
};
use uqbench_core::stats::{bootstrap_ci, paired_bootstrap_test, BootstrapConfig};
use uqbench_core::synth::{generate, SynthConfig};
use uqbench_core::temperature::{fit_temperature, TemperatureModel};
use uqbench_core::uncertainty::{
    decompose, disagreement_matrix, member_diagnostics, member_predictions, pass_probabilities,
};
use uqbench_core::{score, PredictionRecord};

use crate::error::{Error, Result};
use crate::imageio::{load_gray, save_png, ImageJpeg};
use crate::jsonl::{read_records, save_records, RecordStream};
use crate::manifest::RunManifest;
use crate::methods::{Method, MethodScore, Scorer, Strategy};
use crate::tables::*;

#[derive(Debug, Parser)]
#[command(name = "uqbench", version, about = "Uncertainty evaluation for yes/no classifier logit logs")]
pub struct Cli {
    /// Seed for splits, bootstrap resampling, noise and generation.
    #[arg(long, global = true, env = "UQBENCH_SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Calibration metrics, reliability bins and risk-coverage curves.
    Evaluate(EvaluateArgs),
    /// Fit a temperature on a calibration split and evaluate it.
    Temp(TempArgs),
    /// Split-conformal prediction sets and their coverage.
    Conformal(ConformalArgs),
    /// Paraphrase-flip labels and the entropy/flip comparison.
    Bridge(BridgeArgs),
    /// Joint error/flip table over an entropy-ranked coverage grid.
    Sweep(SweepArgs),
    /// Entropy abstention gate over a record stream.
    Gate(GateArgs),
    /// Corruption grid over grayscale images.
    Corrupt(CorruptArgs),
    /// Generate a synthetic record file with known ground truth.
    Synth(SynthArgs),
    /// Bootstrap confidence intervals, paired tests and CSV merging.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// Directory receiving reports and the manifest.
    #[arg(long, default_value = "uqbench-out")]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    /// Fraction of records held out for calibration.
    #[arg(long, default_value_t = 0.15)]
    pub calib_fraction: f64,
    /// Smallest calibration partition.
    #[arg(long, default_value_t = 20)]
    pub min_calib: usize,
}

impl SplitArgs {
    fn spec(&self, seed: u64) -> SplitSpec {
        SplitSpec { calibration_fraction: self.calib_fraction, minimum_calibration: self.min_calib, seed }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Calibration source for the temp method; defaults to --input.
    #[arg(long)]
    pub calib_input: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "softmax")]
    pub method: Vec<Method>,
    #[arg(long, value_enum, default_value = "prob")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Risk level for the coverage-at-risk column.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TempArgs {
    /// Evaluation target; its evaluation split is scored.
    #[arg(long)]
    pub input: PathBuf,
    /// Calibration source; its calibration split fits the temperature.
    #[arg(long)]
    pub calib_input: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ConformalArgs {
    /// Test records; their evaluation split receives prediction sets.
    #[arg(long)]
    pub input: PathBuf,
    /// Calibration records (e.g. clean data for a shift study); defaults to --input.
    #[arg(long)]
    pub calib_input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "softmax")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "prob")]
    pub strategy: Strategy,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1")]
    pub alpha: Vec<f64>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Canonical,
    Consistent,
}

#[derive(Debug, Args, Serialize)]
pub struct BridgeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "softmax")]
    pub method: Vec<Method>,
    #[arg(long, value_enum, default_value = "prob")]
    pub strategy: Strategy,
    #[arg(long, value_enum, default_value = "canonical")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RetainArg {
    Round,
    Ceil,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "softmax")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "prob")]
    pub strategy: Strategy,
    #[arg(long, value_delimiter = ',', default_value = "1.0,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1")]
    pub coverages: Vec<f64>,
    /// Retained count: round(c·n) or ceil(c·n).
    #[arg(long, value_enum, default_value = "round")]
    pub retain: RetainArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TierArg {
    Single,
    Multi,
}

#[derive(Debug, Args, Serialize)]
pub struct GateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Entropy threshold in nats; abstain when entropy exceeds it.
    #[arg(long)]
    pub tau: f64,
    #[arg(long, value_enum, default_value = "single")]
    pub tier: TierArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CorruptArgs {
    /// PNG files or directories of PNG files.
    #[arg(long, required = true, num_args = 1..)]
    pub images: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub kinds: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub severities: Vec<u8>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value = "synthetic")]
    pub dataset: String,
    /// Multiplier applied to calibrated margins.
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta_a: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta_b: f64,
    /// One margin bias per ensemble member.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub member_biases: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub member_noise: f64,
    #[arg(long, default_value_t = 0)]
    pub passes: usize,
    #[arg(long, default_value_t = 0.0)]
    pub pass_jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub paraphrases: usize,
    #[arg(long, default_value_t = 0.0)]
    pub paraphrase_jitter: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Accuracy,
    Ece,
    Brier,
    Nll,
    Aurc,
    Augrc,
}

impl MetricName {
    fn name(self) -> &'static str {
        match self {
            MetricName::Accuracy => "accuracy",
            MetricName::Ece => "ece",
            MetricName::Brier => "brier",
            MetricName::Nll => "nll",
            MetricName::Aurc => "aurc",
            MetricName::Augrc => "augrc",
        }
    }

    fn compute(self, scores: &[MethodScore]) -> f64 {
        let preds: Vec<ScoredPrediction> = scores.iter().map(|s| s.prediction).collect();
        match self {
            MetricName::Aurc | MetricName::Augrc => {
                let curve = curve_of(scores).expect("non-empty resample");
                if self == MetricName::Aurc {
                    aurc(&curve)
                } else {
                    augrc(&curve)
                }
            }
            _ => {
                let m = calibration_metrics_with_bins(&preds, DEFAULT_BINS).expect("non-empty resample");
                match self {
                    MetricName::Accuracy => m.accuracy,
                    MetricName::Ece => m.ece,
                    MetricName::Brier => m.brier,
                    _ => m.nll,
                }
            }
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Records to bootstrap.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "softmax")]
    pub method: Vec<Method>,
    #[arg(long, value_enum, default_value = "prob")]
    pub strategy: Strategy,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "accuracy,ece,brier,nll,aurc")]
    pub metrics: Vec<MetricName>,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 2000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
    /// CSV files with identical headers to concatenate into merged.csv.
    #[arg(long, num_args = 1..)]
    pub merge: Vec<PathBuf>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Parses `argv` and runs the chosen subcommand.
pub fn run_from<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Evaluate(a) => evaluate(a, seed),
        Command::Temp(a) => temp(a, seed),
        Command::Conformal(a) => conformal(a, seed),
        Command::Bridge(a) => bridge(a, seed),
        Command::Sweep(a) => sweep(a, seed),
        Command::Gate(a) => gate(a, seed),
        Command::Corrupt(a) => corrupt(a, seed),
        Command::Synth(a) => synth(a, seed),
        Command::Report(a) => report(a, seed),
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn load(path: &Path) -> Result<Vec<PredictionRecord>> {
    let set = read_records(path)?;
    if set.unknown_fields > 0 {
        eprintln!("{}: ignored {} unknown field(s)", path.display(), set.unknown_fields);
    }
    if set.records.is_empty() {
        return Err(uqbench_core::Error::Empty { what: "record file" }.into());
    }
    Ok(set.records)
}

fn pick(records: &[PredictionRecord], idx: &[usize]) -> Vec<PredictionRecord> {
    idx.iter().map(|&i| records[i].clone()).collect()
}

/// (calibration, evaluation) records: calibration comes from the
/// calibration split of `calib` when given, else of `target`; evaluation is
/// always the evaluation split of `target`.
fn calibration_and_evaluation(
    target: &[PredictionRecord],
    calib: Option<&[PredictionRecord]>,
    spec: &SplitSpec,
) -> Result<(Vec<PredictionRecord>, Vec<PredictionRecord>)> {
    let target_split = split_indices(target.len(), spec)?;
    let eval = pick(target, &target_split.evaluation);
    let cal = match calib {
        Some(source) => pick(source, &split_indices(source.len(), spec)?.calibration),
        None => pick(target, &target_split.calibration),
    };
    Ok((cal, eval))
}

fn fit_on(records: &[PredictionRecord]) -> Result<TemperatureModel> {
    let margins: Vec<f64> = records.iter().map(PredictionRecord::margin).collect();
    let labels: Vec<bool> = records.iter().map(PredictionRecord::is_positive).collect();
    Ok(fit_temperature(&margins, &labels)?)
}

fn curve_of(scores: &[MethodScore]) -> Result<RiskCoverageCurve> {
    let rank: Vec<f64> = scores.iter().map(|s| s.rank_score).collect();
    let tie: Vec<f64> = scores.iter().map(|s| s.tiebreak).collect();
    let correct: Vec<bool> = scores.iter().map(|s| s.prediction.correct()).collect();
    Ok(risk_coverage_with_tiebreak(&rank, &tie, &correct)?)
}

fn finish(mut manifest: RunManifest, out: crate::tables::ReportDir) -> Result<()> {
    manifest.outputs = out.outputs();
    manifest.write(out.path())
}

fn temperature_file(model: &TemperatureModel) -> TemperatureFile {
    TemperatureFile {
        temperature: model.temperature,
        calibration_size: model.calibration_size,
        final_nll: model.final_nll,
    }
}

fn evaluate(args: &EvaluateArgs, seed: u64) -> Result<()> {
    let records = load(&args.input)?;
    let calib_records = args.calib_input.as_deref().map(load).transpose()?;
    let mut inputs = vec![display(&args.input)];
    inputs.extend(args.calib_input.as_deref().map(display));
    let manifest = RunManifest::new("evaluate", seed, inputs, args)?;
    let mut out = ReportDir::create(&args.out.out_dir)?;

    let mut metrics = Vec::new();
    let mut reliability = Vec::new();
    let mut curves = Vec::new();
    let mut decomposition = Vec::new();
    for &method in &args.method {
        let mut scorer = Scorer::new(method, args.strategy);
        let eval_records = if method == Method::Temp {
            let (cal, eval) = calibration_and_evaluation(&records, calib_records.as_deref(), &args.split.spec(seed))?;
            let model = fit_on(&cal)?;
            out.write_json("temperature.json", &temperature_file(&model))?;
            scorer.temperature = Some(model);
            eval
        } else {
            records.clone()
        };
        let label = scorer.label();
        let scores = scorer.score_all(&eval_records)?;
        let preds: Vec<ScoredPrediction> = scores.iter().map(|s| s.prediction).collect();
        let cal = calibration_metrics_with_bins(&preds, args.bins)?;
        let curve = curve_of(&scores)?;
        metrics.push(MetricsRow {
            method: label.clone(),
            n: preds.len(),
            accuracy: cal.accuracy,
            ece: cal.ece,
            brier: cal.brier,
            nll: cal.nll,
            aurc: aurc(&curve),
            augrc: augrc(&curve),
            cov_at_risk: coverage_at_risk(&curve, args.alpha),
        });
        for (bin, b) in reliability_bins(&preds, args.bins)?.into_iter().enumerate() {
            reliability.push(ReliabilityRow {
                method: label.clone(),
                bin,
                lower: b.lower,
                upper: b.upper,
                count: b.count,
                mean_confidence: b.mean_confidence,
                accuracy: b.accuracy,
            });
        }
        for (rank, p) in curve.points.iter().enumerate() {
            curves.push(CurveRow {
                method: label.clone(),
                rank: rank + 1,
                coverage: p.coverage,
                selective_risk: p.selective_risk,
                generalized_risk: p.generalized_risk,
                threshold: p.threshold,
            });
        }
        if scores.iter().all(|s| s.decomposition.is_some()) {
            for (subset, keep) in [("all", None), ("correct", Some(true)), ("error", Some(false))] {
                let chosen: Vec<_> = scores
                    .iter()
                    .filter(|s| keep.is_none_or(|k| s.prediction.correct() == k))
                    .filter_map(|s| s.decomposition)
                    .collect();
                if chosen.is_empty() {
                    continue;
                }
                let n = chosen.len() as f64;
                let mean_total = chosen.iter().map(|d| d.total).sum::<f64>() / n;
                let mean_epistemic = chosen.iter().map(|d| d.epistemic).sum::<f64>() / n;
                decomposition.push(DecompositionRow {
                    method: label.clone(),
                    subset,
                    n: chosen.len(),
                    mean_total,
                    mean_aleatoric: chosen.iter().map(|d| d.aleatoric).sum::<f64>() / n,
                    mean_epistemic,
                    mi_ratio: if mean_total > 0.0 { mean_epistemic / mean_total } else { 0.0 },
                });
            }
        }
        if method == Method::Ensemble {
            let diag = member_diagnostics(&eval_records)?;
            let rows: Vec<MemberRow> = diag
                .iter()
                .map(|d| MemberRow {
                    seed: d.seed,
                    accuracy: d.accuracy,
                    ece: d.ece,
                    brier: d.brier,
                    nll: d.nll,
                    aurc: d.aurc,
                })
                .collect();
            out.write_csv("members.csv", &rows)?;
            let matrix = disagreement_matrix(&member_predictions(&eval_records))?;
            let mut rows = Vec::new();
            for (i, row) in matrix.iter().enumerate() {
                for (j, &rate) in row.iter().enumerate().skip(i + 1) {
                    rows.push(DisagreementRow { seed_a: diag[i].seed, seed_b: diag[j].seed, rate });
                }
            }
            out.write_csv("disagreement.csv", &rows)?;
        }
    }
    out.write_csv("metrics.csv", &metrics)?;
    out.write_csv("reliability.csv", &reliability)?;
    out.write_csv("risk_coverage.csv", &curves)?;
    if !decomposition.is_empty() {
        out.write_csv("decomposition.csv", &decomposition)?;
    }
    finish(manifest, out)
}

fn temp(args: &TempArgs, seed: u64) -> Result<()> {
    let target = load(&args.input)?;
    let source = args.calib_input.as_deref().map(load).transpose()?;
    let mut inputs = vec![display(&args.input)];
    inputs.extend(args.calib_input.as_deref().map(display));
    let manifest = RunManifest::new("temp", seed, inputs, args)?;
    let mut out = ReportDir::create(&args.out.out_dir)?;

    let (cal, eval) = calibration_and_evaluation(&target, source.as_deref(), &args.split.spec(seed))?;
    let model = fit_on(&cal)?;
    let source_name = args.calib_input.as_deref().unwrap_or(&args.input);
    let row = |protocol: String, model: TemperatureModel| -> Result<TempRow> {
        let scorer = Scorer { temperature: Some(model), ..Scorer::new(Method::Temp, Strategy::Prob) };
        let scores = scorer.score_all(&eval)?;
        let preds: Vec<ScoredPrediction> = scores.iter().map(|s| s.prediction).collect();
        let m = calibration_metrics_with_bins(&preds, args.bins)?;
        Ok(TempRow {
            protocol,
            temperature: model.temperature,
            ece: m.ece,
            brier: m.brier,
            nll: m.nll,
            aurc: aurc(&curve_of(&scores)?),
        })
    };
    let rows = vec![
        row(format!("baseline->{}", display(&args.input)), TemperatureModel::identity())?,
        row(format!("{}->{}", display(source_name), display(&args.input)), model)?,
    ];
    out.write_json("temperature.json", &temperature_file(&model))?;
    out.write_csv("temp_metrics.csv", &rows)?;
    finish(manifest, out)
}

fn probabilities(scores: &[MethodScore]) -> (Vec<f64>, Vec<bool>) {
    scores.iter().map(|s| (s.prediction.probability, s.prediction.label)).unzip()
}

fn conformal(args: &ConformalArgs, seed: u64) -> Result<()> {
    let target = load(&args.input)?;
    let source = args.calib_input.as_deref().map(load).transpose()?;
    let mut inputs = vec![display(&args.input)];
    inputs.extend(args.calib_input.as_deref().map(display));
    let manifest = RunManifest::new("conformal", seed, inputs, args)?;
    let mut out = ReportDir::create(&args.out.out_dir)?;

    let (cal, test) = calibration_and_evaluation(&target, source.as_deref(), &args.split.spec(seed))?;
    let mut scorer = Scorer::new(args.method, args.strategy);
    if args.method == Method::Temp {
        scorer.temperature = Some(fit_on(&cal)?);
    }
    let (cal_p, cal_y) = probabilities(&scorer.score_all(&cal)?);
    let (test_p, test_y) = probabilities(&scorer.score_all(&test)?);
    let mut rows = Vec::new();
    for &alpha in &args.alpha {
        let model = conformal_calibrate(&cal_p, &cal_y, alpha)?;
        let sets: Vec<_> = test_p.iter().map(|&p| conformal_predict(p, &model)).collect();
        let r = conformal_report(&sets, &test_y, alpha)?;
        rows.push(ConformalRow {
            method: scorer.label(),
            alpha,
            target: 1.0 - alpha,
            empirical: r.empirical_coverage,
            q_hat: model.q_hat,
            mean_size: r.mean_size,
            singleton_pct: 100.0 * r.singleton_fraction,
            coverage_gap: r.coverage_gap,
            n_cal: model.n_cal,
            n_test: sets.len(),
        });
    }
    out.write_csv("conformal.csv", &rows)?;
    finish(manifest, out)
}

fn mode_name(mode: FlipMode) -> &'static str {
    match mode {
        FlipMode::Canonical => "canonical",
        FlipMode::MethodConsistent => "consistent",
    }
}

fn bridge(args: &BridgeArgs, seed: u64) -> Result<()> {
    let records = load(&args.input)?;
    let manifest = RunManifest::new("bridge", seed, vec![display(&args.input)], args)?;
    let mut out = ReportDir::create(&args.out.out_dir)?;
    let mode = match args.mode {
        ModeArg::Canonical => FlipMode::Canonical,
        ModeArg::Consistent => FlipMode::MethodConsistent,
    };
    let mut rows = Vec::new();
    let mut flip_rows = Vec::new();
    for &method in &args.method {
        let mut scorer = Scorer::new(method, args.strategy);
        let eval = if method == Method::Temp {
            let (cal, eval) = calibration_and_evaluation(&records, None, &args.split.spec(seed))?;
            scorer.temperature = Some(fit_on(&cal)?);
            eval
        } else {
            records.clone()
        };
        let scores = scorer.score_all(&eval)?;
        let reference: Vec<bool> = scores.iter().map(|s| s.prediction.predicted).collect();
        let labels = flip_labels(&eval, mode, Some(&reference))?;
        if labels.without_paraphrases > 0 {
            eprintln!(
                "{}: {} record(s) without paraphrases counted as stable",
                scorer.label(),
                labels.without_paraphrases
            );
        }
        let uncertainty: Vec<f64> = scores.iter().map(|s| s.uncertainty).collect();
        let r = bridge_report(&uncertainty, &labels.flips)?;
        rows.push(BridgeRow {
            method: scorer.label(),
            mode: mode_name(mode),
            n: r.n,
            skipped: r.skipped,
            flip_pct: 100.0 * r.flip_rate,
            h_flip: r.mean_entropy_flipped,
            h_stable: r.mean_entropy_stable,
            delta_h: r.entropy_gap,
            auroc: r.flip_auroc,
            p_value: r.p_value,
            effect_size: r.effect_size,
        });
        if flip_rows.is_empty() || mode == FlipMode::MethodConsistent {
            flip_rows.extend(labels.flips.iter().map(|f| FlipRow {
                id: f.id.clone(),
                flipped: u8::from(f.flipped),
                n_paraphrases: f.n_paraphrases,
                mode: mode_name(mode),
            }));
        }
    }
    out.write_csv("bridge.csv", &rows)?;
    out.write_csv("flips.csv", &flip_rows)?;
    finish(manifest, out)
}

fn sweep(args: &SweepArgs, seed: u64) -> Result<()> {
    let records = load(&args.input)?;
    let manifest = RunManifest::new("sweep", seed, vec![display(&args.input)], args)?;
    let mut out = ReportDir::create(&args.out.out_dir)?;
    if args.method == Method::Temp {
        return Err(Error::Usage("sweep ranks by entropy; use softmax, margin, mcdrop or ensemble".into()));
    }
    let scores = Scorer::new(args.method, args.strategy).score_all(&records)?;
    let entropies: Vec<f64> = scores.iter().map(|s| s.prediction.entropy).collect();
    let correct: Vec<bool> = scores.iter().map(|s| s.prediction.correct()).collect();
    let flips = flip_labels(&records, FlipMode::Canonical, None)?;
    let flipped: Vec<bool> = flips.flips.iter().map(|f| f.flipped).collect();
    let rule = match args.retain {
        RetainArg::Round => RetainRule::RoundHalfUp,
        RetainArg::Ceil => RetainRule::Ceil,
    };
    let table = joint_threshold_sweep(&entropies, &correct, &flipped, &args.coverages, rule)?;
    for c in &table.skipped {
        eprintln!("coverage {c} retains no records; row skipped");
    }
    let rows: Vec<SweepCsvRow> = table
        .rows
        .iter()
        .map(|r| SweepCsvRow {
            coverage: r.coverage,
            n: r.n_retained,
            tau: r.tau,
            error_pct: 100.0 * r.error_rate,
            flip_pct: 100.0 * r.flip_rate,
        })
        .collect();
    out.write_csv("sweep.csv", &rows)?;
    finish(manifest, out)
}

fn gate(args: &GateArgs, seed: u64) -> Result<()> {
    let tier = match args.tier {
        TierArg::Single => Tier::SinglePass,
        TierArg::Multi => Tier::MultiPass,
    };
    let config = GateConfig::new(args.tau, tier)?;
    let manifest = RunManifest::new("gate", seed, vec![display(&args.input)], args)?;
    let mut out = ReportDir::create(&args.out.out_dir)?;
    let file = std::fs::File::open(&args.input).map_err(Error::io(&args.input))?;
    let path = out.path().join("decisions.csv");
    let mut writer = csv::Writer::from_path(&path)?;
    let (mut answered, mut abstained) = (0usize, 0usize);
    for item in RecordStream::new(BufReader::new(file)) {
        let (_, record) = item?;
        let outcome = match tier {
            Tier::SinglePass => abstain(&score(&record), &config),
            Tier::MultiPass => {
                let d = decompose(&pass_probabilities(&record)).map_err(|_| uqbench_core::Error::MissingField {
                    id: record.id.clone(),
                    field: "passes (at least 2)",
                })?;
                abstain(&d, &config)
            }
        };
        let decision = match outcome.decision {
            Decision::Answer => {
                answered += 1;
                "answer"
            }
            Decision::Abstain => {
                abstained += 1;
                "abstain"
            }
        };
        writer.serialize(GateRow {
            id: record.id,
            decision,
            probability: outcome.probability,
            entropy: outcome.entropy,
        })?;
    }
    writer.flush().map_err(Error::io(&path))?;
    out.record("decisions.csv");
    eprintln!("answered {answered}, abstained {abstained}");
    finish(manifest, out)
}

fn image_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(Error::io(p))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn corrupt(args: &CorruptArgs, seed: u64) -> Result<()> {
    let kinds: Vec<CorruptionKind> = if args.kinds.is_empty() {
        CorruptionKind::ALL.to_vec()
    } else {
        args.kinds.iter().map(|k| k.parse()).collect::<uqbench_core::Result<_>>()?
    };
    let severities: Vec<Severity> = if args.severities.is_empty() {
        Severity::ALL.to_vec()
    } else {
        args.severities.iter().map(|&s| Severity::try_from(s)).collect::<uqbench_core::Result<_>>()?
    };
    let files = image_files(&args.images)?;
    let manifest = RunManifest::new("corrupt", seed, files.iter().map(|f| display(f)).collect(), args)?;
    let mut out = ReportDir::create(&args.out.out_dir)?;
    let mut rows = Vec::new();
    for (i, file) in files.iter().enumerate() {
        let img = load_gray(file)?;
        let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| format!("image{i}"));
        for (j, &kind) in kinds.iter().enumerate() {
            for (k, &severity) in severities.iter().enumerate() {
                let spec = CorruptionSpec::new(kind, severity);
                let cell = (i * kinds.len() + j) * severities.len() + k;
                let corrupted = apply_corruption(&img, &spec, seed.wrapping_add(cell as u64), &ImageJpeg)?;
                let name = format!("{stem}__{}_s{}.png", kind.as_str(), severity.level());
                save_png(&out.path().join(&name), &corrupted)?;
                out.record(&name);
                rows.push(CorruptionRow {
                    image_path: display(file),
                    kind: kind.as_str(),
                    severity: severity.level(),
                    output_path: name,
                });
            }
        }
    }
    out.write_csv("manifest.csv", &rows)?;
    finish(manifest, out)
}

fn synth(args: &SynthArgs, seed: u64) -> Result<()> {
    let config = SynthConfig {
        n: args.n,
        seed,
        dataset: args.dataset.clone(),
        temperature_distortion: args.temperature,
        prevalence_shape: (args.beta_a, args.beta_b),
        member_biases: args.member_biases.clone(),
        member_noise: args.member_noise,
        pass_count: args.passes,
        pass_jitter: args.pass_jitter,
        paraphrase_count: args.paraphrases,
        paraphrase_jitter: args.paraphrase_jitter,
    };
    let records = generate(&config)?;
    let manifest = RunManifest::new("synth", seed, Vec::new(), args)?;
    let mut out = ReportDir::create(&args.out.out_dir)?;
    save_records(&out.path().join("records.jsonl"), &records)?;
    out.record("records.jsonl");
    finish(manifest, out)
}

fn merge_csvs(files: &[PathBuf], out: &mut ReportDir) -> Result<()> {
    let path = out.path().join("merged.csv");
    let mut writer = csv::Writer::from_path(&path)?;
    let mut header: Option<csv::StringRecord> = None;
    for file in files {
        let mut reader = csv::Reader::from_path(file)?;
        let h = reader.headers()?.clone();
        match &header {
            None => {
                let mut full = csv::StringRecord::from(vec!["source"]);
                full.extend(h.iter());
                writer.write_record(&full)?;
                header = Some(h);
            }
            Some(expected) if *expected != h => {
                return Err(Error::Usage(format!("{}: header differs from {}", file.display(), files[0].display())));
            }
            Some(_) => {}
        }
        let source = display(file);
        for row in reader.records() {
            let row = row?;
            let mut full = csv::StringRecord::from(vec![source.as_str()]);
            full.extend(row.iter());
            writer.write_record(&full)?;
        }
    }
    writer.flush().map_err(Error::io(&path))?;
    out.record("merged.csv");
    Ok(())
}

fn report(args: &ReportArgs, seed: u64) -> Result<()> {
    if args.input.is_none() && args.merge.is_empty() {
        return Err(Error::Usage("report needs --input and/or --merge".into()));
    }
    let mut inputs: Vec<String> = args.input.iter().map(|p| display(p)).collect();
    inputs.extend(args.merge.iter().map(|p| display(p)));
    let manifest = RunManifest::new("report", seed, inputs, args)?;
    let mut out = ReportDir::create(&args.out.out_dir)?;
    if !args.merge.is_empty() {
        merge_csvs(&args.merge, &mut out)?;
    }
    if let Some(input) = &args.input {
        let records = load(input)?;
        let config = BootstrapConfig { replicates: args.bootstrap, seed, ci_level: args.ci_level };
        // A fitted temperature needs held-out data, so every method is then
        // scored on the same evaluation split to keep the pairs aligned.
        let (model, records) = if args.method.contains(&Method::Temp) {
            let (cal, eval) = calibration_and_evaluation(&records, None, &args.split.spec(seed))?;
            (Some(fit_on(&cal)?), eval)
        } else {
            (None, records)
        };
        let mut scored = Vec::new();
        for &method in &args.method {
            let scorer = Scorer { temperature: model, ..Scorer::new(method, args.strategy) };
            scored.push((scorer.label(), scorer.score_all(&records)?));
        }
        let mut ci_rows = Vec::new();
        let mut paired_rows = Vec::new();
        for &metric in &args.metrics {
            for (label, scores) in &scored {
                let ci = bootstrap_ci(scores, |s| metric.compute(s), &config)?;
                ci_rows.push(CiRow {
                    method: label.clone(),
                    metric: metric.name().into(),
                    estimate: ci.estimate,
                    lower: ci.lower,
                    upper: ci.upper,
                });
            }
            for (i, (label_a, a)) in scored.iter().enumerate() {
                for (label_b, b) in scored.iter().skip(i + 1) {
                    let p_value = paired_bootstrap_test(a, b, |s| metric.compute(s), &config)?;
                    paired_rows.push(PairedRow {
                        metric: metric.name().into(),
                        method_a: label_a.clone(),
                        method_b: label_b.clone(),
                        estimate_a: metric.compute(a),
                        estimate_b: metric.compute(b),
                        p_value,
                    });
                }
            }
        }
        out.write_csv("ci.csv", &ci_rows)?;
        if !paired_rows.is_empty() {
            out.write_csv("paired.csv", &paired_rows)?;
        }
    }
    finish(manifest, out)
}
