//! Resampling and rank statistics: percentile bootstrap, paired bootstrap
//! test, Mann-Whitney U with rank-biserial effect size, and AUROC.

use alloc::vec::Vec;

use crate::math::normal_sf;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Largest group size for which the exact U distribution is enumerated.
pub const EXACT_MAX_GROUP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub ci_level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { replicates: 2000, seed: 0, ci_level: 0.95 }
    }
}

impl BootstrapConfig {
    fn check(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Domain { name: "replicates", value: 0.0 });
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Domain { name: "ci_level", value: self.ci_level });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    /// Statistic on the full sample.
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Linear-interpolated quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn resample_indices(rng: &mut SeededRng, n: usize, out: &mut Vec<usize>) {
    out.clear();
    out.extend((0..n).map(|_| rng.index(n)));
}

/// Percentile bootstrap interval of `statistic` over `values`.
pub fn bootstrap_ci<T, F>(values: &[T], statistic: F, config: &BootstrapConfig) -> Result<ConfidenceInterval>
where
    T: Clone,
    F: Fn(&[T]) -> f64,
{
    config.check()?;
    if values.is_empty() {
        return Err(Error::Empty { what: "bootstrap" });
    }
    let mut rng = SeededRng::new(config.seed);
    let mut idx = Vec::with_capacity(values.len());
    let mut sample: Vec<T> = Vec::with_capacity(values.len());
    let mut replicates: Vec<f64> = (0..config.replicates)
        .map(|_| {
            resample_indices(&mut rng, values.len(), &mut idx);
            sample.clear();
            sample.extend(idx.iter().map(|&i| values[i].clone()));
            statistic(&sample)
        })
        .collect();
    replicates.sort_by(f64::total_cmp);
    let tail = (1.0 - config.ci_level) / 2.0;
    Ok(ConfidenceInterval {
        estimate: statistic(values),
        lower: quantile_sorted(&replicates, tail),
        upper: quantile_sorted(&replicates, 1.0 - tail),
    })
}

/// Two-sided paired bootstrap p-value for `statistic(a) - statistic(b)`.
///
/// Pairs are resampled jointly. The p-value is `2 min(P[Δ* <= 0], P[Δ* >= 0])`
/// clamped to 1, so a delta of exactly zero counts toward both tails.
pub fn paired_bootstrap_test<T, F>(
    values_a: &[T],
    values_b: &[T],
    statistic: F,
    config: &BootstrapConfig,
) -> Result<f64>
where
    T: Clone,
    F: Fn(&[T]) -> f64,
{
    config.check()?;
    if values_a.len() != values_b.len() {
        return Err(Error::LengthMismatch { left: values_a.len(), right: values_b.len() });
    }
    if values_a.is_empty() {
        return Err(Error::Empty { what: "paired bootstrap" });
    }
    let n = values_a.len();
    let mut rng = SeededRng::new(config.seed);
    let mut idx = Vec::with_capacity(n);
    let (mut sa, mut sb): (Vec<T>, Vec<T>) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut left, mut right) = (0usize, 0usize);
    for _ in 0..config.replicates {
        resample_indices(&mut rng, n, &mut idx);
        sa.clear();
        sb.clear();
        sa.extend(idx.iter().map(|&i| values_a[i].clone()));
        sb.extend(idx.iter().map(|&i| values_b[i].clone()));
        let delta = statistic(&sa) - statistic(&sb);
        left += usize::from(delta <= 0.0);
        right += usize::from(delta >= 0.0);
    }
    let b = config.replicates as f64;
    Ok((2.0 * (left as f64 / b).min(right as f64 / b)).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

/// Alternative hypothesis, phrased for the first group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alternative {
    #[default]
    TwoSided,
    /// First group tends to be larger.
    Greater,
    /// First group tends to be smaller.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    /// Pairs with the first group larger, ties counted one half.
    pub statistic: f64,
    pub p_value: f64,
    /// Rank-biserial correlation `2U / (n1 n2) - 1`: +1 when every first-group
    /// value exceeds every second-group value.
    pub effect_size: f64,
    pub method: TestMethod,
}

/// Pooled ranking of two groups.
struct Ranking {
    n1: usize,
    n2: usize,
    /// Twice the rank sum of the first group (midranks for ties).
    twice_rank_sum: u64,
    /// (size, doubled midrank) per tie block, ascending.
    blocks: Vec<(usize, u64)>,
}

impl Ranking {
    fn new(u: &[f64], v: &[f64]) -> Self {
        let mut pooled: Vec<(f64, bool)> = u.iter().map(|&x| (x, true)).chain(v.iter().map(|&x| (x, false))).collect();
        pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut twice_rank_sum = 0u64;
        let mut blocks = Vec::new();
        let mut start = 0;
        while start < pooled.len() {
            let mut end = start + 1;
            while end < pooled.len() && pooled[end].0 == pooled[start].0 {
                end += 1;
            }
            // ranks start+1 ..= end, doubled midrank start+1+end
            let doubled = (start + 1 + end) as u64;
            let firsts = pooled[start..end].iter().filter(|p| p.1).count() as u64;
            twice_rank_sum += firsts * doubled;
            blocks.push((end - start, doubled));
            start = end;
        }
        Self { n1: u.len(), n2: v.len(), twice_rank_sum, blocks }
    }

    /// `2U`, an integer.
    fn twice_u(&self) -> u64 {
        self.twice_rank_sum - (self.n1 * (self.n1 + 1)) as u64
    }

    fn u(&self) -> f64 {
        self.twice_u() as f64 / 2.0
    }

    /// Counts of each doubled rank sum over all ways to pick `n1` of the
    /// pooled items; exact under ties because tie blocks share a midrank.
    fn rank_sum_counts(&self) -> Vec<u64> {
        let n = self.n1 + self.n2;
        let max_sum = n * (n + 1);
        let width = max_sum + 1;
        let mut dp = alloc::vec![0u64; (self.n1 + 1) * width];
        dp[0] = 1;
        let mut next = dp.clone();
        for &(size, doubled) in &self.blocks {
            next.iter_mut().for_each(|x| *x = 0);
            let binom = binomials(size);
            for taken in 0..=self.n1 {
                for s in 0..width {
                    let ways = dp[taken * width + s];
                    if ways == 0 {
                        continue;
                    }
                    for j in 0..=size.min(self.n1 - taken) {
                        let s2 = s + j * doubled as usize;
                        next[(taken + j) * width + s2] += ways * binom[j];
                    }
                }
            }
            core::mem::swap(&mut dp, &mut next);
        }
        dp[self.n1 * width..].to_vec()
    }

    fn tie_correction(&self) -> f64 {
        self.blocks.iter().map(|&(t, _)| (t * t * t - t) as f64).sum()
    }
}

fn binomials(n: usize) -> Vec<u64> {
    let mut row = alloc::vec![1u64; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as u64 / k as u64;
    }
    row
}

fn exact_p(r: &Ranking, alternative: Alternative) -> f64 {
    let counts = r.rank_sum_counts();
    let total: u64 = counts.iter().sum();
    let observed = r.twice_rank_sum as usize;
    let at_most: u64 = counts[..=observed].iter().sum();
    let at_least: u64 = counts[observed..].iter().sum();
    let (lo, hi) = (at_most as f64 / total as f64, at_least as f64 / total as f64);
    match alternative {
        Alternative::TwoSided => (2.0 * lo.min(hi)).min(1.0),
        Alternative::Greater => hi,
        Alternative::Less => lo,
    }
}

fn normal_p(r: &Ranking, alternative: Alternative) -> f64 {
    let (n1, n2) = (r.n1 as f64, r.n2 as f64);
    let n = n1 + n2;
    let mean = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - r.tie_correction() / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let sd = libm::sqrt(var);
    let u = r.u();
    match alternative {
        Alternative::TwoSided => {
            let z = ((u - mean).abs() - 0.5).max(0.0) / sd;
            (2.0 * normal_sf(z)).min(1.0)
        }
        Alternative::Greater => normal_sf((u - mean - 0.5) / sd),
        Alternative::Less => normal_sf(-(u - mean + 0.5) / sd),
    }
}

/// Two-sided Mann-Whitney U test of `u_group` against `v_group`.
pub fn mann_whitney(u_group: &[f64], v_group: &[f64]) -> Result<TestResult> {
    mann_whitney_with(u_group, v_group, Alternative::TwoSided)
}

/// Mann-Whitney U test. Exact when both groups have at most
/// [`EXACT_MAX_GROUP`] members, otherwise normal with tie-corrected variance
/// and a 0.5 continuity correction.
pub fn mann_whitney_with(u_group: &[f64], v_group: &[f64], alternative: Alternative) -> Result<TestResult> {
    if u_group.is_empty() || v_group.is_empty() {
        return Err(Error::Empty { what: "Mann-Whitney group" });
    }
    if let Some(&x) = u_group.iter().chain(v_group).find(|x| x.is_nan()) {
        return Err(Error::Domain { name: "Mann-Whitney value", value: x });
    }
    let ranking = Ranking::new(u_group, v_group);
    let exact = u_group.len() <= EXACT_MAX_GROUP && v_group.len() <= EXACT_MAX_GROUP;
    let (p_value, method) = if exact {
        (exact_p(&ranking, alternative), TestMethod::Exact)
    } else {
        (normal_p(&ranking, alternative), TestMethod::NormalApprox)
    };
    let statistic = ranking.u();
    let pairs = (u_group.len() * v_group.len()) as f64;
    Ok(TestResult { statistic, p_value, effect_size: 2.0 * statistic / pairs - 1.0, method })
}

/// Normal-approximation p-value regardless of group size.
pub fn mann_whitney_normal(u_group: &[f64], v_group: &[f64], alternative: Alternative) -> Result<f64> {
    if u_group.is_empty() || v_group.is_empty() {
        return Err(Error::Empty { what: "Mann-Whitney group" });
    }
    Ok(normal_p(&Ranking::new(u_group, v_group), alternative))
}

/// Area under the ROC curve of `scores` for `positives`, ties counted one
/// half: the Mann-Whitney U of positives over negatives divided by `n+ n-`.
pub fn auroc(scores: &[f64], positives: &[bool]) -> Result<f64> {
    if scores.len() != positives.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: positives.len() });
    }
    let pick = |want: bool| -> Vec<f64> {
        scores.iter().zip(positives).filter(|&(_, &y)| y == want).map(|(&s, _)| s).collect()
    };
    let (pos, neg) = (pick(true), pick(false));
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass { what: "auroc" });
    }
    let u = Ranking::new(&pos, &neg).u();
    Ok(u / (pos.len() * neg.len()) as f64)
}
