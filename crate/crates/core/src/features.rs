//! Lexical, psycholinguistic and jargon features for correlation analysis.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::analyzers::{is_word, sentence_stats};
use crate::corpus::{AnnotatedSentence, ComplexSpan};
use crate::error::{Error, Result};
use crate::jargon::{count_jargon, CoarseLabel, Granularity};

pub const FEATURE_IDS: [&str; 26] = [
    "t_word",
    "t_uword",
    "t_char",
    "t_syll",
    "t_syll2",
    "t_syll3",
    "avg_chars_per_token",
    "corr_ttr",
    "aoa_max",
    "aoa_total",
    "aoa_avg",
    "zipf_total",
    "n_soph_word_tokens",
    "n_soph_word_types",
    "jargon_spans_medical",
    "jargon_tokens_medical",
    "jargon_token_pct_medical",
    "jargon_spans_general_multisense",
    "jargon_tokens_general_multisense",
    "jargon_token_pct_general_multisense",
    "jargon_spans_abbreviation",
    "jargon_tokens_abbreviation",
    "jargon_token_pct_abbreviation",
    "jargon_spans_all",
    "jargon_tokens_all",
    "jargon_token_pct_all",
];

/// Values aligned with [`FEATURE_IDS`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn get(&self, id: &str) -> Option<f64> {
        FEATURE_IDS.iter().position(|f| *f == id).map(|i| self.0[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_IDS.iter().copied().zip(self.0.iter().copied())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResourceTables {
    pub aoa: HashMap<String, f64>,
    pub zipf: HashMap<String, f64>,
    pub common2000: HashSet<String>,
}

fn read_table(path: &Path) -> Result<HashMap<String, f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (word, value) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected word<TAB>value".into()))?;
        match value.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => {
                table.insert(word.trim().to_lowercase(), v);
            }
            // tolerate a header row
            _ if i == 0 => {}
            _ => return Err(malformed(format!("bad value {value:?}"))),
        }
    }
    Ok(table)
}

impl ResourceTables {
    /// Reads `aoa.tsv`, `zipf.tsv` and `common2000.txt` from `dir`.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let common_path = dir.join("common2000.txt");
        let common = fs::read_to_string(&common_path).map_err(|e| Error::io(&common_path, e))?;
        Ok(ResourceTables {
            aoa: read_table(&dir.join("aoa.tsv"))?,
            zipf: read_table(&dir.join("zipf.tsv"))?,
            common2000: common
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        })
    }
}

/// Feature vector for one sentence; `spans` may be gold or predicted.
pub fn extract(sentence: &AnnotatedSentence, resources: &ResourceTables, spans: &[ComplexSpan]) -> Result<FeatureVector> {
    let stats = sentence_stats(&sentence.tokens).map_err(|e| match e {
        Error::NoWords => Error::Invalid {
            id: sentence.id.clone(),
            message: "sentence has no words".into(),
        },
        other => other,
    })?;
    let words: Vec<String> = sentence
        .tokens
        .iter()
        .filter(|t| is_word(t))
        .map(|t| t.to_lowercase())
        .collect();

    let aoa: Vec<f64> = words.iter().filter_map(|w| resources.aoa.get(w).copied()).collect();
    let aoa_total: f64 = aoa.iter().sum();
    let aoa_max = aoa.iter().copied().fold(0.0, f64::max);
    let aoa_avg = if aoa.is_empty() { 0.0 } else { aoa_total / aoa.len() as f64 };
    let zipf_total: f64 = words.iter().filter_map(|w| resources.zipf.get(w)).sum();

    let soph: Vec<&String> = words
        .iter()
        .filter(|w| w.chars().any(char::is_alphabetic) && !resources.common2000.contains(*w))
        .collect();
    let soph_types: HashSet<&String> = soph.iter().copied().collect();

    let n_word = stats.n_words as f64;
    let mut values = vec![
        n_word,
        stats.n_unique_words as f64,
        stats.n_chars as f64,
        stats.n_syllables as f64,
        stats.n_polysyllables as f64,
        stats.n_long_polysyllables as f64,
        stats.n_chars as f64 / n_word,
        stats.n_unique_words as f64 / (2.0 * n_word).sqrt(),
        aoa_max,
        aoa_total,
        aoa_avg,
        zipf_total,
        soph.len() as f64,
        soph_types.len() as f64,
    ];

    let jargon = count_jargon(spans, &sentence.tokens, Granularity::ThreeClass);
    let per_label = [CoarseLabel::Medical, CoarseLabel::GeneralMultisense, CoarseLabel::Abbreviation]
        .map(|l| jargon.label(l));
    for c in per_label.iter().chain(std::iter::once(&jargon.total)) {
        values.extend([c.n_spans as f64, c.n_tokens as f64, c.pct_tokens]);
    }
    debug_assert_eq!(values.len(), FEATURE_IDS.len());
    Ok(FeatureVector(values))
}
