//! Dispatch from a [`MetricKind`] to the formula that computes it.

use crate::analyzers::sentence_stats;
use crate::error::{Error, Result};
use crate::metrics::{ari, fkgl, jar_variant, length_baseline, rsrs, smog, AlphaTable, MetricKind, MetricScore, SurprisalProvider};

pub struct Scorer<'a> {
    provider: Option<&'a dyn SurprisalProvider>,
    alphas: AlphaTable,
}

impl<'a> Scorer<'a> {
    pub fn new(provider: Option<&'a dyn SurprisalProvider>, alphas: AlphaTable) -> Self {
        Scorer { provider, alphas }
    }

    pub fn alphas(&self) -> &AlphaTable {
        &self.alphas
    }

    /// Whether `metric` can be computed with the configured provider and
    /// jargon weights.
    pub fn supports(&self, metric: MetricKind) -> bool {
        (metric.base() != MetricKind::Rsrs || self.provider.is_some())
            && (!metric.is_jar() || self.alphas.get(metric).is_some())
    }

    /// Scores one sentence. `jargon_spans` is only read by -Jar metrics.
    pub fn score<S: AsRef<str>>(&self, tokens: &[S], metric: MetricKind, jargon_spans: usize) -> Result<MetricScore> {
        let base = match metric.base() {
            MetricKind::Rsrs => {
                let provider = self.provider.ok_or_else(|| {
                    Error::InvalidArgument("rsrs needs a surprisal provider".into())
                })?;
                rsrs(tokens, provider)?
            }
            kind => {
                let stats = sentence_stats(tokens)?;
                match kind {
                    MetricKind::Length => length_baseline(&stats),
                    MetricKind::Fkgl => fkgl(&stats)?,
                    MetricKind::Ari => ari(&stats)?,
                    MetricKind::Smog => smog(&stats)?,
                    _ => unreachable!("base() returns a base metric"),
                }
            }
        };
        if !metric.is_jar() {
            return Ok(base);
        }
        let alpha = self
            .alphas
            .get(metric)
            .ok_or_else(|| Error::InvalidArgument(format!("no alpha configured for {metric}")))?;
        jar_variant(&base, jargon_spans, alpha)
    }
}
