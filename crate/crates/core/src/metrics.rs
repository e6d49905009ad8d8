//! Sentence-level readability formulas and their jargon-augmented variants.
//!
//! Every formula treats its input as exactly one sentence, so the
//! words-per-sentence term of FKGL/ARI is the word count and SMOG's `30 / S`
//! is 30.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analyzers::{is_word, SentenceStats};
use crate::error::{Error, Result};
use crate::stats::pearson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Length,
    Fkgl,
    Ari,
    Smog,
    Rsrs,
    FkglJar,
    AriJar,
    SmogJar,
    RsrsJar,
}

impl MetricKind {
    pub const ALL: [MetricKind; 9] = [
        MetricKind::Length,
        MetricKind::Fkgl,
        MetricKind::Ari,
        MetricKind::Smog,
        MetricKind::Rsrs,
        MetricKind::FkglJar,
        MetricKind::AriJar,
        MetricKind::SmogJar,
        MetricKind::RsrsJar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Length => "length",
            MetricKind::Fkgl => "fkgl",
            MetricKind::Ari => "ari",
            MetricKind::Smog => "smog",
            MetricKind::Rsrs => "rsrs",
            MetricKind::FkglJar => "fkgl-jar",
            MetricKind::AriJar => "ari-jar",
            MetricKind::SmogJar => "smog-jar",
            MetricKind::RsrsJar => "rsrs-jar",
        }
    }

    pub fn is_jar(self) -> bool {
        self.base() != self
    }

    /// The formula a -Jar variant is built on; identity for base metrics.
    pub fn base(self) -> MetricKind {
        match self {
            MetricKind::FkglJar => MetricKind::Fkgl,
            MetricKind::AriJar => MetricKind::Ari,
            MetricKind::SmogJar => MetricKind::Smog,
            MetricKind::RsrsJar => MetricKind::Rsrs,
            other => other,
        }
    }

    /// The -Jar variant of a base formula, if one exists.
    pub fn jar(self) -> Option<MetricKind> {
        match self {
            MetricKind::Fkgl | MetricKind::FkglJar => Some(MetricKind::FkglJar),
            MetricKind::Ari | MetricKind::AriJar => Some(MetricKind::AriJar),
            MetricKind::Smog | MetricKind::SmogJar => Some(MetricKind::SmogJar),
            MetricKind::Rsrs | MetricKind::RsrsJar => Some(MetricKind::RsrsJar),
            MetricKind::Length => None,
        }
    }

    /// Multiplier applied to the base value before adding the jargon term.
    /// RSRS values are below 1 and are brought to a comparable range.
    pub fn jar_scale(self) -> f64 {
        match self.base() {
            MetricKind::Rsrs => 100.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric {s:?}")))
    }
}

/// A metric value with the intermediate quantities it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricScore {
    pub metric: MetricKind,
    pub value: f64,
    pub components: BTreeMap<&'static str, f64>,
}

impl MetricScore {
    fn new(metric: MetricKind, value: f64, components: &[(&'static str, f64)]) -> Self {
        MetricScore {
            metric,
            value,
            components: components.iter().copied().collect(),
        }
    }
}

fn require_words(stats: &SentenceStats) -> Result<f64> {
    if stats.n_words == 0 {
        return Err(Error::NoWords);
    }
    Ok(stats.n_words as f64)
}

/// Flesch-Kincaid grade level.
pub fn fkgl(stats: &SentenceStats) -> Result<MetricScore> {
    let words = require_words(stats)?;
    let syllables = stats.n_syllables as f64;
    let value = 0.39 * words + 11.8 * (syllables / words) - 15.59;
    Ok(MetricScore::new(
        MetricKind::Fkgl,
        value,
        &[("words", words), ("syllables", syllables), ("sentences", 1.0)],
    ))
}

/// Automated readability index.
pub fn ari(stats: &SentenceStats) -> Result<MetricScore> {
    let words = require_words(stats)?;
    let chars = stats.n_chars as f64;
    let value = 4.71 * (chars / words) + 0.5 * words - 21.43;
    Ok(MetricScore::new(
        MetricKind::Ari,
        value,
        &[("words", words), ("chars", chars), ("sentences", 1.0)],
    ))
}

pub fn smog(stats: &SentenceStats) -> Result<MetricScore> {
    let words = require_words(stats)?;
    let poly = stats.n_polysyllables as f64;
    let value = 1.0430 * (poly * 30.0).sqrt() + 3.1291;
    Ok(MetricScore::new(
        MetricKind::Smog,
        value,
        &[("words", words), ("polysyllables", poly), ("sentences", 1.0)],
    ))
}

pub fn length_baseline(stats: &SentenceStats) -> MetricScore {
    let words = stats.n_words as f64;
    MetricScore::new(MetricKind::Length, words, &[("words", words)])
}

/// Per-word negative log-likelihood and out-of-vocabulary flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surprisal {
    pub wnll: f64,
    pub oov: bool,
}

/// Maps a word to its surprisal under some language model. Implementations
/// must be deterministic.
pub trait SurprisalProvider: Send + Sync {
    fn surprisal(&self, word: &str) -> Surprisal;
}

/// Add-one smoothed unigram model over case-folded word counts.
#[derive(Debug, Clone, Default)]
pub struct UnigramProvider {
    counts: HashMap<String, u64>,
    log_denominator: f64,
}

impl UnigramProvider {
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut table: HashMap<String, u64> = HashMap::new();
        for (word, count) in counts {
            *table.entry(word.as_ref().to_lowercase()).or_default() += count;
        }
        let total: u64 = table.values().sum();
        let vocab = table.len() as u64;
        UnigramProvider {
            log_denominator: ((total + vocab) as f64).max(1.0).ln(),
            counts: table,
        }
    }

    /// Reads a `word<TAB>count` file. Duplicate keys are summed.
    pub fn from_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed = line
                .split_once('\t')
                .and_then(|(w, c)| c.trim().parse::<u64>().ok().map(|c| (w.to_string(), c)));
            match parsed {
                Some(row) => rows.push(row),
                None => {
                    return Err(Error::Malformed {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        message: "expected word<TAB>count".into(),
                    })
                }
            }
        }
        Ok(Self::from_counts(rows))
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.len()
    }
}

impl SurprisalProvider for UnigramProvider {
    fn surprisal(&self, word: &str) -> Surprisal {
        let count = self.counts.get(&word.to_lowercase()).copied();
        let numerator = (count.unwrap_or(0) + 1) as f64;
        Surprisal {
            wnll: self.log_denominator - numerator.ln(),
            oov: count.is_none(),
        }
    }
}

/// Ranked sentence readability score.
///
/// Word losses are sorted ascending; the word at rank `i` (1-based)
/// contributes `sqrt(i)^a * loss` with `a = 2` for out-of-vocabulary words
/// and 1 otherwise. The sum is divided by the number of words.
pub fn rsrs<S: AsRef<str>>(tokens: &[S], provider: &dyn SurprisalProvider) -> Result<MetricScore> {
    let mut losses = Vec::new();
    for tok in tokens.iter().map(AsRef::as_ref).filter(|t| is_word(t)) {
        let s = provider.surprisal(tok);
        if !s.wnll.is_finite() || s.wnll < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "surprisal for {tok:?} is {} (must be finite and non-negative)",
                s.wnll
            )));
        }
        losses.push(s);
    }
    rsrs_from_losses(&losses)
}

pub fn rsrs_from_losses(losses: &[Surprisal]) -> Result<MetricScore> {
    if losses.is_empty() {
        return Err(Error::NoWords);
    }
    let mut sorted = losses.to_vec();
    // In-vocabulary words rank ahead of OOV words at equal loss so that the
    // result does not depend on input order.
    sorted.sort_by(|a, b| a.wnll.total_cmp(&b.wnll).then(a.oov.cmp(&b.oov)));

    let n = sorted.len() as f64;
    let total: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let rank = (i + 1) as f64;
            let weight = if s.oov { rank } else { rank.sqrt() };
            weight * s.wnll
        })
        .sum();
    let oov = sorted.iter().filter(|s| s.oov).count() as f64;
    Ok(MetricScore::new(
        MetricKind::Rsrs,
        total / n,
        &[("words", n), ("oov_words", oov)],
    ))
}

/// Adds `alpha * jargon_spans` to the (scaled) base score.
pub fn jar_variant(base: &MetricScore, jargon_spans: usize, alpha: f64) -> Result<MetricScore> {
    let metric = base.metric.jar().filter(|_| !base.metric.is_jar()).ok_or_else(|| {
        Error::InvalidArgument(format!("no jargon variant of {}", base.metric))
    })?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    let scale = base.metric.jar_scale();
    let count = jargon_spans as f64;
    let mut components = base.components.clone();
    components.insert("base_value", base.value);
    components.insert("scale", scale);
    components.insert("jargon_spans", count);
    components.insert("alpha", alpha);
    Ok(MetricScore {
        metric,
        value: scale * base.value + alpha * count,
        components,
    })
}

/// Inclusive grid `lo, lo + step, ..., <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            lo: 0.0,
            hi: 20.0,
            step: 0.05,
        }
    }
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo || lo < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "degenerate grid {lo}:{hi}:{step}"
            )));
        }
        Ok(Grid { lo, hi, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Parses `LO:HI:STEP`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad grid {s:?}")))?;
        match nums[..] {
            [lo, hi, step] => Grid::new(lo, hi, step),
            _ => Err(Error::InvalidArgument(format!("bad grid {s:?}, expected LO:HI:STEP"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevPoint {
    /// Unscaled base metric value.
    pub base: f64,
    pub jargon_spans: usize,
    pub gold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub dev_pearson: f64,
}

/// Grid search for the jargon weight maximising Pearson correlation with
/// gold on `dev`. Ties go to the smallest alpha.
pub fn tune_alpha(dev: &[DevPoint], metric: MetricKind, grid: Grid) -> Result<AlphaFit> {
    if dev.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 dev points, got {}",
            dev.len()
        )));
    }
    let gold: Vec<f64> = dev.iter().map(|p| p.gold).collect();
    if gold.iter().all(|&g| g == gold[0]) {
        return Err(Error::Undefined("gold ratings are constant".into()));
    }
    let scale = metric.jar_scale();
    let mut best: Option<AlphaFit> = None;
    let mut combined = vec![0.0; dev.len()];
    for alpha in grid.points() {
        for (slot, p) in combined.iter_mut().zip(dev) {
            *slot = scale * p.base + alpha * p.jargon_spans as f64;
        }
        let Ok(r) = pearson(&combined, &gold) else {
            continue;
        };
        if best.is_none_or(|b| r > b.dev_pearson) {
            best = Some(AlphaFit {
                alpha,
                dev_pearson: r,
            });
        }
    }
    best.ok_or_else(|| Error::Undefined("correlation undefined at every grid point".into()))
}

/// Per-metric jargon weights, stored as `metric<TAB>alpha`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlphaTable(pub BTreeMap<MetricKind, f64>);

impl AlphaTable {
    /// Weight for a metric; base and -Jar names share one entry.
    pub fn get(&self, metric: MetricKind) -> Option<f64> {
        self.0.get(&metric.base()).copied()
    }

    pub fn insert(&mut self, metric: MetricKind, alpha: f64) {
        self.0.insert(metric.base(), alpha);
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut table = AlphaTable::default();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| Error::Malformed {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let (name, alpha) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected metric<TAB>alpha".into()))?;
            let metric: MetricKind = name.trim().parse().map_err(|e: Error| malformed(e.to_string()))?;
            let alpha: f64 = alpha
                .trim()
                .parse()
                .map_err(|_| malformed(format!("bad alpha {alpha:?}")))?;
            table.insert(metric, alpha);
        }
        Ok(table)
    }

    pub fn to_tsv(&self) -> String {
        self.0
            .iter()
            .map(|(m, a)| format!("{m}\t{a}\n"))
            .collect()
    }
}
