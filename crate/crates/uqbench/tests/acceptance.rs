//! Acceptance gate: runs every criterion and prints one PASS/FAIL line each.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use uqbench::imageio::save_png;
use uqbench::jsonl::save_records;
use uqbench_core::bridge::{bridge_report, flip_labels, FlipMode};
use uqbench_core::conformal::{conformal_calibrate, conformal_predict, conformal_report};
use uqbench_core::corruption::{
    apply_corruption, severity_params, CorruptionKind, CorruptionSpec, GrayImage, NoJpeg, Severity,
};
use uqbench_core::metrics::calibration_metrics;
use uqbench_core::record::{split_indices, SplitSpec};
use uqbench_core::rng::SeededRng;
use uqbench_core::selective::{augrc, aurc, coverage_at_risk, risk_coverage, RetainRule};
use uqbench_core::stats::{auroc, mann_whitney, mann_whitney_normal, Alternative};
use uqbench_core::synth::{generate, SynthConfig};
use uqbench_core::temperature::fit_temperature;
use uqbench_core::uncertainty::decompose;
use uqbench_core::{score, PredictionRecord};

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(elapsed: Duration, limit_secs: u64) -> Outcome {
    ensure!(elapsed <= Duration::from_secs(limit_secs), "took {:.2?} (limit {limit_secs} s)", elapsed);
    Ok(format!("{:.2?}", elapsed))
}

fn synth(cfg: SynthConfig) -> Vec<PredictionRecord> {
    generate(&cfg).expect("valid synth config")
}

fn c1_decomposition() -> Outcome {
    let start = Instant::now();
    let mut rng = SeededRng::new(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let len = 2 + rng.index(31);
        let probs: Vec<f64> = (0..len).map(|_| rng.uniform()).collect();
        let d = decompose(&probs).map_err(|e| e.to_string())?;
        let gap = (d.total - d.aleatoric - d.epistemic).abs();
        worst = worst.max(gap);
        ensure!(gap < 1e-12, "identity gap {gap:e}");
        ensure!(d.epistemic >= -1e-12, "negative MI {}", d.epistemic);
        let constant = vec![probs[0]; len];
        let c = decompose(&constant).map_err(|e| e.to_string())?;
        ensure!(c.epistemic == 0.0, "MI {:e} on constant vector", c.epistemic);
    }
    let t = within(start.elapsed(), 5)?;
    Ok(format!("max gap {worst:.1e}, {t}"))
}

fn c2_calibrated_ece() -> Outcome {
    let start = Instant::now();
    let records = synth(SynthConfig { n: 20_000, seed: 2, ..SynthConfig::default() });
    let preds: Vec<_> = records.iter().map(score).collect();
    let m = calibration_metrics(&preds).map_err(|e| e.to_string())?;
    // Beta(2,2): E[p(1-p)] = E[p] - Var[p] - E[p]^2 = 0.5 - 0.05 - 0.25.
    let analytic = 0.2;
    ensure!(m.ece < 0.02, "ECE {:.4}", m.ece);
    ensure!((m.brier - analytic).abs() <= 0.005, "Brier {:.4} vs {analytic}", m.brier);
    let t = within(start.elapsed(), 10)?;
    Ok(format!("ECE {:.4}, Brier {:.4}, {t}", m.ece, m.brier))
}

fn c3_temperature() -> Outcome {
    let mut found = Vec::new();
    for (k, t0) in [0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
        let records =
            synth(SynthConfig { n: 20_000, seed: 30 + k as u64, temperature_distortion: t0, ..SynthConfig::default() });
        let margins: Vec<f64> = records.iter().map(PredictionRecord::margin).collect();
        let labels: Vec<bool> = records.iter().map(PredictionRecord::is_positive).collect();
        let model = fit_temperature(&margins, &labels).map_err(|e| e.to_string())?;
        ensure!((model.temperature / t0 - 1.0).abs() <= 0.05, "T0 {t0}: fitted {:.4}", model.temperature);
        for (&m, &y) in margins.iter().zip(&labels) {
            ensure!(
                model.apply(m, y).predicted == score(&PredictionRecord::new("x", m, 0.0, u8::from(y))).predicted,
                "argmax changed at margin {m}"
            );
        }
        found.push(format!("{t0}->{:.3}", model.temperature));
    }
    Ok(found.join(", "))
}

fn c4_conformal() -> Outcome {
    let start = Instant::now();
    let n = 653;
    let spec = SplitSpec::default();
    let n_cal = spec.calibration_size(n);
    let mut details = Vec::new();
    for alpha in [0.05, 0.10] {
        let mut total = 0.0;
        for seed in 0..200u64 {
            let records = synth(SynthConfig { n, seed: 4000 + seed, ..SynthConfig::default() });
            let split = split_indices(n, &SplitSpec::with_seed(seed)).map_err(|e| e.to_string())?;
            let p = |i: &usize| score(&records[*i]).probability;
            let y = |i: &usize| records[*i].is_positive();
            let cal_p: Vec<f64> = split.calibration.iter().map(p).collect();
            let cal_y: Vec<bool> = split.calibration.iter().map(y).collect();
            let model = conformal_calibrate(&cal_p, &cal_y, alpha).map_err(|e| e.to_string())?;
            let sets: Vec<_> = split.evaluation.iter().map(|i| conformal_predict(p(i), &model)).collect();
            let test_y: Vec<bool> = split.evaluation.iter().map(y).collect();
            total += conformal_report(&sets, &test_y, alpha).map_err(|e| e.to_string())?.empirical_coverage;
        }
        let mean = total / 200.0;
        let upper = 1.0 - alpha + 1.0 / (n_cal as f64 + 1.0) + 0.01;
        ensure!(mean >= 1.0 - alpha, "alpha {alpha}: mean coverage {mean:.4} below target");
        ensure!(mean <= upper, "alpha {alpha}: mean coverage {mean:.4} above {upper:.4}");
        details.push(format!("alpha {alpha}: {mean:.4}"));
    }
    let t = within(start.elapsed(), 60)?;
    Ok(format!("n_cal {n_cal}, {}, {t}", details.join(", ")))
}

fn c5_auroc() -> Outcome {
    let mut rng = SeededRng::new(5);
    for _ in 0..100 {
        let n = 2 + rng.index(199);
        let scores: Vec<f64> = (0..n).map(|_| rng.index(10) as f64).collect();
        let mut pos: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.5)).collect();
        pos[0] = true;
        pos[1] = false;
        let mut twice_u = 0u64;
        for i in (0..n).filter(|&i| pos[i]) {
            for j in (0..n).filter(|&j| !pos[j]) {
                twice_u += match scores[i].partial_cmp(&scores[j]).unwrap() {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
        }
        let (np, nn) = (pos.iter().filter(|&&p| p).count(), pos.iter().filter(|&&p| !p).count());
        let brute = twice_u as f64 / 2.0 / (np * nn) as f64;
        let got = auroc(&scores, &pos).map_err(|e| e.to_string())?;
        ensure!((got - brute).abs() < 1e-12, "AUROC {got} vs {brute}");
        let u = got * (np * nn) as f64;
        ensure!(
            (2.0 * u).round() as u64 == twice_u && (2.0 * u - twice_u as f64).abs() < 1e-9,
            "U {u} vs {}",
            twice_u as f64 / 2.0
        );
    }
    Ok("100 instances".into())
}

fn enumerate_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let u = |mask: u32| -> f64 {
        let mut u = 0.0;
        for i in (0..n).filter(|i| mask & (1 << i) != 0) {
            for j in (0..n).filter(|j| mask & (1 << j) == 0) {
                if pooled[i] > pooled[j] {
                    u += 1.0;
                }
            }
        }
        u
    };
    let observed = u((1 << a.len()) - 1);
    let (mut lo, mut hi, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let v = u(mask);
        total += 1;
        lo += u64::from(v <= observed);
        hi += u64::from(v >= observed);
    }
    (2.0 * (lo as f64 / total as f64).min(hi as f64 / total as f64)).min(1.0)
}

fn c6_mann_whitney() -> Outcome {
    let mut rng = SeededRng::new(6);
    for nf in 1..=6 {
        for ns in 1..=6 {
            let mut values: Vec<f64> = (0..nf + ns).map(|i| i as f64).collect();
            rng.shuffle(&mut values);
            let (a, b) = values.split_at(nf);
            let exact = mann_whitney(a, b).map_err(|e| e.to_string())?.p_value;
            let brute = enumerate_p(a, b);
            ensure!((exact - brute).abs() < 1e-12, "({nf},{ns}): {exact} vs {brute}");
        }
    }
    let mut worst = 0.0f64;
    for nf in 15..=20 {
        for ns in 15..=20 {
            let a: Vec<f64> = (0..nf).map(|_| rng.normal(0.5, 1.0)).collect();
            let b: Vec<f64> = (0..ns).map(|_| rng.normal(0.0, 1.0)).collect();
            let exact = mann_whitney(&a, &b).map_err(|e| e.to_string())?.p_value;
            let approx = mann_whitney_normal(&a, &b, Alternative::TwoSided).map_err(|e| e.to_string())?;
            worst = worst.max((exact - approx).abs());
        }
    }
    ensure!(worst <= 0.02, "normal approximation off by {worst:.4}");
    Ok(format!("36 exact pairs, max normal gap {worst:.4}"))
}

fn c7_selective() -> Outcome {
    let mut rng = SeededRng::new(7);
    for _ in 0..50 {
        let n = 1 + rng.index(200);
        let scores: Vec<f64> = (0..n).map(|_| (rng.index(20) as f64 - 10.0) / 7.0).collect();
        let correct: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.75)).collect();
        let moved: Vec<f64> = scores.iter().map(|x| x * x * x + 5.0).collect();
        let a = risk_coverage(&scores, &correct).map_err(|e| e.to_string())?;
        let b = risk_coverage(&moved, &correct).map_err(|e| e.to_string())?;
        for (p, q) in a.points.iter().zip(&b.points) {
            ensure!(
                p.coverage == q.coverage
                    && p.selective_risk == q.selective_risk
                    && p.generalized_risk == q.generalized_risk,
                "curve moved"
            );
        }
        ensure!(aurc(&a) == aurc(&b) && augrc(&a) == augrc(&b), "areas moved");
        for alpha in [0.05, 0.1, 0.2, 0.5] {
            ensure!(coverage_at_risk(&a, alpha) == coverage_at_risk(&b, alpha), "coverage@risk moved");
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap());
        let mut brute = 0.0;
        for k in 1..=n {
            brute += order[..k].iter().filter(|&&i| !correct[i]).count() as f64 / k as f64;
        }
        brute /= n as f64;
        ensure!((aurc(&a) - brute).abs() < 1e-12, "AURC {} vs brute {brute}", aurc(&a));
    }
    Ok("50 instances".into())
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_uqbench"))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin()).args(args).env_remove("UQBENCH_SEED").output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("uqbench {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn read_csv(path: &Path) -> Result<Vec<BTreeMap<String, String>>, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| e.to_string())?;
            Ok(headers.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn c8_sweep(dir: &Path) -> Outcome {
    let mut records =
        synth(SynthConfig { n: 861, seed: 8, paraphrase_count: 3, paraphrase_jitter: 0.5, ..SynthConfig::default() });
    records[100].logit_yes = 1.25;
    records[100].logit_no = 1.25;
    let input = dir.join("c8.jsonl");
    save_records(&input, &records).map_err(|e| e.to_string())?;
    let out = dir.join("c8");
    cli(&["sweep", "--input", s(&input), "--out-dir", s(&out)])?;
    let rows = read_csv(&out.join("sweep.csv"))?;
    let full = rows.iter().find(|r| r["coverage"] == "1.0" || r["coverage"] == "1").ok_or("no 100% row")?;
    let tau: f64 = full["tau"].parse().map_err(|_| "tau not numeric")?;
    ensure!(format!("{tau:.4}") == "0.6931", "tau at 100% is {tau}");
    let grid = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1];
    for (row, c) in rows.iter().zip(grid) {
        let n: usize = row["n"].parse().map_err(|_| "n not numeric")?;
        let expected = RetainRule::RoundHalfUp.count(c, 861);
        ensure!(
            n == expected && expected == (c * 861.0_f64).round() as usize,
            "coverage {c}: {n} retained, expected {expected}"
        );
    }
    ensure!(rows[1]["n"] == "775", "90% row retains {}", rows[1]["n"]);
    Ok(format!("tau {tau:.4}, 861 -> {} at 90%", rows[1]["n"]))
}

fn c9_bridge() -> Outcome {
    let start = Instant::now();
    // Margin scale under Beta(2,2): sd of logit(p) = sqrt(2 * trigamma(2)) = sqrt(pi^2/3 - 2).
    let scale = (std::f64::consts::PI.powi(2) / 3.0 - 2.0).sqrt();
    let records = synth(SynthConfig {
        n: 2000,
        seed: 9,
        paraphrase_count: 5,
        paraphrase_jitter: 0.5 * scale,
        ..SynthConfig::default()
    });
    let entropies: Vec<f64> = records.iter().map(|r| score(r).entropy).collect();
    let flips = flip_labels(&records, FlipMode::Canonical, None).map_err(|e| e.to_string())?.flips;
    let r = bridge_report(&entropies, &flips).map_err(|e| e.to_string())?;
    let a = r.flip_auroc.ok_or("single flip class")?;
    let p = r.p_value.ok_or("single flip class")?;
    ensure!(a > 0.60, "flip AUROC {a:.3}");
    ensure!(r.entropy_gap > 0.0, "entropy gap {:.4}", r.entropy_gap);
    ensure!(p < 1e-3, "p {p:e}");
    let mut shuffled: Vec<bool> = flips.iter().map(|f| f.flipped).collect();
    SeededRng::new(90).shuffle(&mut shuffled);
    let null = auroc(&entropies, &shuffled).map_err(|e| e.to_string())?;
    ensure!((0.45..=0.55).contains(&null), "shuffled AUROC {null:.3}");
    let t = within(start.elapsed(), 15)?;
    Ok(format!("AUROC {a:.3}, gap {:.3}, p {p:.1e}, shuffled {null:.3}, {t}", r.entropy_gap))
}

fn c10_corruption() -> Outcome {
    let table = [
        (CorruptionKind::GaussianNoise, [0.04, 0.08, 0.12]),
        (CorruptionKind::GaussianBlur, [1.0, 2.0, 3.0]),
        (CorruptionKind::Contrast, [0.7, 0.5, 0.3]),
        (CorruptionKind::Brightness, [0.05, 0.10, 0.15]),
        (CorruptionKind::Jpeg, [50.0, 30.0, 10.0]),
    ];
    for (kind, values) in table {
        for (sev, v) in Severity::ALL.into_iter().zip(values) {
            ensure!(severity_params(kind, sev) == v, "{kind} s{}: {}", sev.level(), severity_params(kind, sev));
        }
    }
    let flat = GrayImage::filled(37, 23, 91);
    for sev in Severity::ALL {
        let out = apply_corruption(&flat, &CorruptionSpec::new(CorruptionKind::GaussianBlur, sev), 0, &NoJpeg)
            .map_err(|e| e.to_string())?;
        ensure!(out == flat, "blur changed a constant image at s{}", sev.level());
    }
    let mid = GrayImage::filled(512, 512, 128);
    let mut worst = 0.0f64;
    for sev in Severity::ALL {
        let spec = CorruptionSpec::new(CorruptionKind::GaussianNoise, sev);
        let out = apply_corruption(&mid, &spec, 10, &NoJpeg).map_err(|e| e.to_string())?;
        let n = out.pixels.len() as f64;
        let mean = out.mean();
        let var = out.pixels.iter().map(|&x| (f64::from(x) - mean).powi(2)).sum::<f64>() / n;
        let target = (255.0 * spec.parameter).powi(2);
        worst = worst.max((var / target - 1.0).abs());
        ensure!((var / target - 1.0).abs() <= 0.05, "s{} variance {var:.1} vs {target:.1}", sev.level());
    }
    let ramp = GrayImage::new(64, 2, (0..128).map(|i| 40 + i as u8).collect()).map_err(|e| e.to_string())?;
    for sev in Severity::ALL {
        let spec = CorruptionSpec::new(CorruptionKind::Brightness, sev);
        let out = apply_corruption(&ramp, &spec, 0, &NoJpeg).map_err(|e| e.to_string())?;
        let shift = (255.0 * spec.parameter + 0.5).floor();
        for (a, b) in ramp.pixels.iter().zip(&out.pixels) {
            ensure!(
                f64::from(*b) - f64::from(*a) == shift,
                "brightness s{} shift {}",
                sev.level(),
                i32::from(*b) - i32::from(*a)
            );
        }
        ensure!(out.mean() - ramp.mean() == shift, "mean shift");
    }
    Ok(format!("15 cells, max noise variance error {:.2}%", 100.0 * worst))
}

fn c11_margin_softmax(dir: &Path) -> Outcome {
    let mut records = synth(SynthConfig { n: 500, seed: 11, temperature_distortion: 6.0, ..SynthConfig::default() });
    for (i, r) in records.iter_mut().enumerate().take(40) {
        r.logit_yes = if i % 2 == 0 { 60.0 + i as f64 } else { -55.0 - i as f64 };
    }
    let input = dir.join("c11.jsonl");
    save_records(&input, &records).map_err(|e| e.to_string())?;
    let read = |method: &str| -> Result<BTreeMap<String, String>, String> {
        let out = dir.join(format!("c11-{method}"));
        cli(&["evaluate", "--input", s(&input), "--method", method, "--out-dir", s(&out)])?;
        read_csv(&out.join("metrics.csv"))?.into_iter().next().ok_or_else(|| "empty metrics.csv".into())
    };
    let (m, sm) = (read("margin")?, read("softmax")?);
    for col in ["ece", "brier", "nll", "aurc"] {
        ensure!(m[col] == sm[col], "{col}: margin {} vs softmax {}", m[col], sm[col]);
    }
    Ok(format!("AURC {}", m["aurc"]))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable output dir") {
            let p = entry.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).expect("inside dir").display().to_string();
                out.insert(rel, std::fs::read(&p).expect("readable output"));
            }
        }
    }
    out
}

fn c12_determinism(dir: &Path) -> Outcome {
    let records = synth(SynthConfig {
        n: 300,
        seed: 12,
        temperature_distortion: 2.0,
        member_biases: vec![0.0, 0.3, -0.3, 0.6, -0.1],
        member_noise: 0.5,
        pass_count: 6,
        pass_jitter: 0.4,
        paraphrase_count: 3,
        paraphrase_jitter: 0.6,
        ..SynthConfig::default()
    });
    let input = dir.join("c12.jsonl");
    save_records(&input, &records).map_err(|e| e.to_string())?;
    let calib = dir.join("c12-calib.jsonl");
    save_records(
        &calib,
        &synth(SynthConfig { n: 200, seed: 13, pass_count: 3, pass_jitter: 0.2, ..SynthConfig::default() }),
    )
    .map_err(|e| e.to_string())?;
    let image = dir.join("c12.png");
    let pixels = (0..48 * 32).map(|i| ((i * 7) % 251) as u8).collect();
    save_png(&image, &GrayImage::new(48, 32, pixels).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let i = s(&input).to_string();
    let c = s(&calib).to_string();
    let img = s(&image).to_string();
    let commands: Vec<(&str, Vec<String>)> = vec![
        (
            "evaluate",
            vec!["--input".into(), i.clone(), "--method".into(), "softmax,margin,temp,mcdrop,ensemble".into()],
        ),
        ("temp", vec!["--input".into(), i.clone(), "--calib-input".into(), c.clone()]),
        ("conformal", vec!["--input".into(), i.clone(), "--calib-input".into(), c.clone()]),
        (
            "bridge",
            vec![
                "--input".into(),
                i.clone(),
                "--method".into(),
                "softmax,ensemble".into(),
                "--mode".into(),
                "consistent".into(),
            ],
        ),
        ("sweep", vec!["--input".into(), i.clone(), "--method".into(), "mcdrop".into()]),
        ("gate", vec!["--input".into(), i.clone(), "--tau".into(), "0.5".into(), "--tier".into(), "multi".into()]),
        ("corrupt", vec!["--images".into(), img]),
        ("synth", vec!["--n".into(), "50".into(), "--passes".into(), "3".into(), "--pass-jitter".into(), "0.3".into()]),
        (
            "report",
            vec![
                "--input".into(),
                i.clone(),
                "--method".into(),
                "softmax,temp".into(),
                "--bootstrap".into(),
                "200".into(),
            ],
        ),
    ];
    for (name, args) in &commands {
        let mut runs = Vec::new();
        for run in 0..2 {
            let out = dir.join(format!("c12-{name}-{run}"));
            let mut argv: Vec<&str> = vec![name, "--seed", "77"];
            argv.extend(args.iter().map(String::as_str));
            argv.extend(["--out-dir", s(&out)]);
            cli(&argv)?;
            runs.push(snapshot(&out));
        }
        ensure!(!runs[0].is_empty(), "{name} wrote nothing");
        ensure!(runs[0] == runs[1], "{name} outputs differ between runs");
    }
    Ok(format!("{} subcommands", commands.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let criteria: Vec<(&str, Check)> = vec![
        ("decomposition identity", Box::new(c1_decomposition)),
        ("calibrated synthetic ECE and Brier", Box::new(c2_calibrated_ece)),
        ("temperature recovery", Box::new(c3_temperature)),
        ("conformal coverage guarantee", Box::new(c4_conformal)),
        ("AUROC oracle equivalence", Box::new(c5_auroc)),
        ("Mann-Whitney exactness", Box::new(c6_mann_whitney)),
        ("selective monotone invariance", Box::new(c7_selective)),
        ("joint sweep anchor", Box::new(move || c8_sweep(d))),
        ("bridge positivity", Box::new(c9_bridge)),
        ("corruption fidelity", Box::new(c10_corruption)),
        ("margin/softmax coincidence", Box::new(move || c11_margin_softmax(d))),
        ("CLI determinism", Box::new(move || c12_determinism(d))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
