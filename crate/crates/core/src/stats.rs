//! Correlation and agreement statistics, bootstrap intervals, and grouped
//! evaluation reports.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analyzers::is_word;
use crate::corpus::AnnotatedSentence;
use crate::error::{Error, Result};

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} values", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::Undefined(format!("pearson needs >= 3 pairs, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("constant vector".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise concordance over gold-distinct pairs. Pairs tied in `pred`
/// count as discordant.
pub fn kendall_tau_like(gold: &[f64], pred: &[f64]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} values", gold.len(), pred.len())));
    }
    let (mut conc, mut disc) = (0u64, 0u64);
    for i in 0..gold.len() {
        for j in i + 1..gold.len() {
            let dg = gold[i] - gold[j];
            if dg == 0.0 {
                continue;
            }
            let dp = pred[i] - pred[j];
            if dg * dp > 0.0 {
                conc += 1;
            } else {
                disc += 1;
            }
        }
    }
    if conc + disc == 0 {
        return Err(Error::Undefined("all gold values tied".into()));
    }
    Ok((conc as f64 - disc as f64) / (conc + disc) as f64)
}

/// Linear-interpolation quantile of an ascending slice (numpy's default).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Pearson,
    KendallTauLike,
}

impl Statistic {
    pub fn compute(self, gold: &[f64], pred: &[f64]) -> Result<f64> {
        match self {
            Statistic::Pearson => pearson(gold, pred),
            Statistic::KendallTauLike => kendall_tau_like(gold, pred),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::Pearson => "pearson",
            Statistic::KendallTauLike => "kendall-tau-like",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(Statistic::Pearson),
            "kendall" | "kendall-tau-like" => Ok(Statistic::KendallTauLike),
            _ => Err(Error::InvalidArgument(format!("unknown statistic {s:?}"))),
        }
    }
}

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub iters: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            iters: 1000,
            level: 0.95,
            seed: DEFAULT_SEED,
        }
    }
}

/// Percentile bootstrap interval for `statistic` over (gold, pred) pairs.
///
/// Resamples are drawn sequentially from a seeded ChaCha8 stream; resamples
/// on which the statistic is undefined are discarded and redrawn (at most
/// `10 * iters` redraws). Replicates are evaluated in parallel, which does
/// not affect the result.
pub fn bootstrap_ci(pairs: &[(f64, f64)], statistic: Statistic, cfg: &BootstrapConfig) -> Result<(f64, f64)> {
    if cfg.iters < 100 {
        return Err(Error::InvalidArgument(format!("bootstrap needs >= 100 iterations, got {}", cfg.iters)));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::InvalidArgument(format!("level must be in (0, 1), got {}", cfg.level)));
    }
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument(format!("bootstrap needs >= 3 pairs, got {}", pairs.len())));
    }

    let n = pairs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut replicates = Vec::with_capacity(cfg.iters);
    let mut redraws = 0usize;
    let cap = 10 * cfg.iters;

    while replicates.len() < cfg.iters {
        let needed = cfg.iters - replicates.len();
        let batch: Vec<Vec<usize>> = (0..needed)
            .map(|_| (0..n).map(|_| rng.random_range(0..n)).collect())
            .collect();
        let values: Vec<Option<f64>> = batch
            .par_iter()
            .map(|idx| {
                let gold: Vec<f64> = idx.iter().map(|&i| pairs[i].0).collect();
                let pred: Vec<f64> = idx.iter().map(|&i| pairs[i].1).collect();
                statistic.compute(&gold, &pred).ok()
            })
            .collect();
        for v in values {
            match v {
                Some(v) => replicates.push(v),
                None => {
                    redraws += 1;
                    if redraws > cap {
                        return Err(Error::Undefined(format!(
                            "bootstrap redraw cap of {cap} exceeded"
                        )));
                    }
                }
            }
        }
    }

    replicates.sort_by(f64::total_cmp);
    let tail = (1.0 - cfg.level) / 2.0;
    Ok((quantile(&replicates, tail), quantile(&replicates, 1.0 - tail)))
}

/// Krippendorff's alpha with the interval metric `(a - b)^2`.
///
/// `ratings` is units x annotators; `None` marks a missing rating. Units with
/// fewer than two ratings are not pairable and are ignored.
pub fn krippendorff_alpha_interval(ratings: &[Vec<Option<f64>>]) -> Result<f64> {
    let units: Vec<Vec<f64>> = ratings
        .iter()
        .map(|u| u.iter().flatten().copied().collect::<Vec<f64>>())
        .filter(|u| u.len() >= 2)
        .collect();
    if units.len() < 2 {
        return Err(Error::Undefined("need at least two units with two or more ratings".into()));
    }

    // Sum of (a - b)^2 over ordered pairs of distinct positions in `v`.
    let pair_sum = |v: &[f64]| {
        let m = v.len() as f64;
        let s: f64 = v.iter().sum();
        let ss: f64 = v.iter().map(|x| x * x).sum();
        2.0 * (m * ss - s * s)
    };

    let all: Vec<f64> = units.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let observed: f64 = units
        .iter()
        .map(|u| pair_sum(u) / (u.len() as f64 - 1.0))
        .sum::<f64>()
        / n;
    let expected = pair_sum(&all) / (n * (n - 1.0));
    if expected == 0.0 {
        return Err(Error::Undefined("no variation in ratings".into()));
    }
    Ok(1.0 - observed / expected)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub statistic: Statistic,
    pub group: Option<String>,
    pub r: f64,
    pub n: usize,
    pub ci: Option<(f64, f64)>,
    pub level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedGroup {
    pub group: String,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupedReport {
    pub rows: Vec<CorrelationResult>,
    pub skipped: Vec<SkippedGroup>,
    /// Unweighted mean of the group statistics.
    pub mean: Option<f64>,
    /// Population standard deviation of the group statistics.
    pub std: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    Source,
    None,
}

impl FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" => Ok(GroupBy::Source),
            "none" => Ok(GroupBy::None),
            _ => Err(Error::InvalidArgument(format!("unknown grouping {s:?}"))),
        }
    }
}

const GROUP_ORDER: [&str; 8] = [
    "Cochrane",
    "PNAS",
    "NIHR Series",
    "eLife",
    "PLOS Series",
    "Wiki",
    "MSD",
    "Other",
];

pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
    Some((mean, var.sqrt()))
}

fn lookup(map: &HashMap<String, f64>, id: &str, what: &str) -> Result<f64> {
    map.get(id).copied().ok_or_else(|| Error::Invalid {
        id: id.to_string(),
        message: format!("no {what} value"),
    })
}

fn correlate_group(
    group: String,
    pairs: &[(f64, f64)],
    statistic: Statistic,
    bootstrap: Option<&BootstrapConfig>,
    min_n: usize,
) -> std::result::Result<CorrelationResult, SkippedGroup> {
    let skip = |reason: String| SkippedGroup {
        group: group.clone(),
        n: pairs.len(),
        reason,
    };
    if pairs.len() < min_n {
        return Err(skip(format!("fewer than {min_n} rated sentences")));
    }
    let gold: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let pred: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let r = statistic.compute(&gold, &pred).map_err(|e| skip(e.to_string()))?;
    let ci = match bootstrap {
        Some(cfg) => Some(bootstrap_ci(pairs, statistic, cfg).map_err(|e| skip(e.to_string()))?),
        None => None,
    };
    Ok(CorrelationResult {
        statistic,
        group: Some(group.clone()),
        r,
        n: pairs.len(),
        ci,
        level: bootstrap.map(|b| b.level),
    })
}

/// Correlation per source group (NIHR and PLOS journals pooled) plus the
/// mean and population standard deviation across groups.
pub fn grouped_correlation<'a, I>(
    scores: &HashMap<String, f64>,
    gold: &HashMap<String, f64>,
    sentences: I,
    group_by: GroupBy,
    statistic: Statistic,
    bootstrap: Option<&BootstrapConfig>,
) -> Result<GroupedReport>
where
    I: IntoIterator<Item = &'a AnnotatedSentence>,
{
    let mut groups: BTreeMap<usize, (String, Vec<(f64, f64)>)> = BTreeMap::new();
    for s in sentences {
        let (order, name) = match group_by {
            GroupBy::None => (0, "all"),
            GroupBy::Source => {
                let name = s.source.report_group();
                (GROUP_ORDER.iter().position(|g| *g == name).unwrap_or(GROUP_ORDER.len()), name)
            }
        };
        let pair = (lookup(gold, &s.id, "gold")?, lookup(scores, &s.id, "score")?);
        groups
            .entry(order)
            .or_insert_with(|| (name.to_string(), Vec::new()))
            .1
            .push(pair);
    }

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (_, (name, pairs)) in groups {
        match correlate_group(name, &pairs, statistic, bootstrap, 3) {
            Ok(row) => rows.push(row),
            Err(skip) => skipped.push(skip),
        }
    }
    let rs: Vec<f64> = rows.iter().map(|r| r.r).collect();
    let summary = mean_std(&rs);
    Ok(GroupedReport {
        rows,
        skipped,
        mean: summary.map(|s| s.0),
        std: summary.map(|s| s.1),
    })
}

/// Word-count bucket edges. `k` strictly increasing boundaries give `k + 1`
/// buckets: `n < b1`, `b1 <= n < b2`, ..., `n >= bk`.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthBuckets {
    boundaries: Vec<f64>,
}

impl LengthBuckets {
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.windows(2).any(|w| w[0] >= w[1]) || boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bucket boundaries must be strictly increasing: {boundaries:?}"
            )));
        }
        Ok(LengthBuckets { boundaries })
    }

    /// Quartile edges of the given word counts (duplicates merged).
    pub fn quartiles(word_counts: &[usize]) -> Result<Self> {
        if word_counts.is_empty() {
            return Err(Error::InvalidArgument("no sentences to take quartiles of".into()));
        }
        let mut sorted: Vec<f64> = word_counts.iter().map(|&n| n as f64).collect();
        sorted.sort_by(f64::total_cmp);
        let mut edges: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&q| quantile(&sorted, q)).collect();
        edges.dedup();
        LengthBuckets::new(edges)
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bucket_of(&self, n_words: usize) -> usize {
        let n = n_words as f64;
        self.boundaries.iter().take_while(|&&b| b <= n).count()
    }

    pub fn label(&self, bucket: usize) -> String {
        let b = &self.boundaries;
        match (bucket.checked_sub(1).map(|i| b[i]), b.get(bucket)) {
            (None, None) => "all".into(),
            (None, Some(hi)) => format!("<{hi}"),
            (Some(lo), None) => format!(">={lo}"),
            (Some(lo), Some(hi)) => format!("[{lo},{hi})"),
        }
    }
}

pub fn word_count(sentence: &AnnotatedSentence) -> usize {
    sentence.tokens.iter().filter(|t| is_word(t)).count()
}

/// Per-bucket statistic (with optional bootstrap interval); buckets that are
/// empty or where the statistic is undefined are reported as skipped.
pub fn length_bucketed_correlation<'a, I>(
    scores: &HashMap<String, f64>,
    gold: &HashMap<String, f64>,
    sentences: I,
    buckets: &LengthBuckets,
    statistic: Statistic,
    bootstrap: Option<&BootstrapConfig>,
) -> Result<GroupedReport>
where
    I: IntoIterator<Item = &'a AnnotatedSentence>,
{
    let mut pairs: Vec<Vec<(f64, f64)>> = vec![Vec::new(); buckets.len()];
    for s in sentences {
        let pair = (lookup(gold, &s.id, "gold")?, lookup(scores, &s.id, "score")?);
        pairs[buckets.bucket_of(word_count(s))].push(pair);
    }
    let min_n = match statistic {
        Statistic::Pearson => 3,
        Statistic::KendallTauLike => 2,
    };
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        match correlate_group(buckets.label(i), p, statistic, bootstrap, min_n) {
            Ok(row) => rows.push(row),
            Err(skip) => skipped.push(skip),
        }
    }
    let rs: Vec<f64> = rows.iter().map(|r| r.r).collect();
    let summary = mean_std(&rs);
    Ok(GroupedReport {
        rows,
        skipped,
        mean: summary.map(|s| s.0),
        std: summary.map(|s| s.1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureCorrelation {
    pub feature: String,
    /// `None` when the feature (or gold) is constant or too few sentences.
    pub r: Option<f64>,
    pub n: usize,
}

/// Pearson correlation of each feature column against gold, ranked by r
/// descending; undefined correlations follow in input order.
pub fn feature_correlations(
    names: &[&str],
    rows: &HashMap<String, Vec<f64>>,
    gold: &HashMap<String, f64>,
) -> Vec<FeatureCorrelation> {
    let mut ids: Vec<&String> = rows.keys().filter(|id| gold.contains_key(*id)).collect();
    ids.sort();
    let g: Vec<f64> = ids.iter().map(|id| gold[*id]).collect();
    let mut out: Vec<FeatureCorrelation> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let x: Vec<f64> = ids.iter().map(|id| rows[*id][j]).collect();
            FeatureCorrelation {
                feature: name.to_string(),
                r: pearson(&x, &g).ok(),
                n: ids.len(),
            }
        })
        .collect();
    out.sort_by(|a, b| match (a.r, b.r) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    out
}
