//! Complex-span tagging with a token trie, label granularities, jargon
//! counts, and ingestion of externally produced predictions.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analyzers::is_word;
use crate::corpus::{check_span_layout, from_bio, ComplexSpan, Corpus, SpanCategory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    Binary,
    ThreeClass,
    SevenCategory,
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [
        Granularity::SevenCategory,
        Granularity::ThreeClass,
        Granularity::Binary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Binary => "binary",
            Granularity::ThreeClass => "three-class",
            Granularity::SevenCategory => "seven-category",
        }
    }

    fn rank(self) -> u8 {
        match self {
            Granularity::SevenCategory => 2,
            Granularity::ThreeClass => 1,
            Granularity::Binary => 0,
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" | "2" => Ok(Granularity::Binary),
            "three-class" | "3" => Ok(Granularity::ThreeClass),
            "seven-category" | "7" => Ok(Granularity::SevenCategory),
            _ => Err(Error::InvalidArgument(format!("unknown granularity {s:?}"))),
        }
    }
}

/// A span label at some granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoarseLabel {
    Fine(SpanCategory),
    Medical,
    GeneralMultisense,
    Abbreviation,
    Complex,
}

impl CoarseLabel {
    pub fn granularity(self) -> Granularity {
        match self {
            CoarseLabel::Fine(_) => Granularity::SevenCategory,
            CoarseLabel::Complex => Granularity::Binary,
            _ => Granularity::ThreeClass,
        }
    }

    /// Re-labels at a coarser (or equal) granularity; `None` if `g` is finer.
    pub fn coarsen(self, g: Granularity) -> Option<CoarseLabel> {
        if g.rank() > self.granularity().rank() {
            return None;
        }
        Some(match (self, g) {
            (CoarseLabel::Fine(c), _) => collapse(c, g),
            (_, Granularity::Binary) => CoarseLabel::Complex,
            (label, _) => label,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseLabel::Fine(c) => c.as_str(),
            CoarseLabel::Medical => "medical",
            CoarseLabel::GeneralMultisense => "general+multisense",
            CoarseLabel::Abbreviation => "abbreviation",
            CoarseLabel::Complex => "complex",
        }
    }

    /// All labels at granularity `g`.
    pub fn all(g: Granularity) -> Vec<CoarseLabel> {
        match g {
            Granularity::SevenCategory => SpanCategory::ALL.iter().map(|&c| CoarseLabel::Fine(c)).collect(),
            Granularity::ThreeClass => vec![
                CoarseLabel::Medical,
                CoarseLabel::GeneralMultisense,
                CoarseLabel::Abbreviation,
            ],
            Granularity::Binary => vec![CoarseLabel::Complex],
        }
    }
}

impl fmt::Display for CoarseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for CoarseLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

pub fn collapse(category: SpanCategory, g: Granularity) -> CoarseLabel {
    use SpanCategory::*;
    match g {
        Granularity::SevenCategory => CoarseLabel::Fine(category),
        Granularity::Binary => CoarseLabel::Complex,
        Granularity::ThreeClass => match category {
            GoogleEasy | GoogleHard | MedicalNameEntity => CoarseLabel::Medical,
            GeneralComplex | MultiSense => CoarseLabel::GeneralMultisense,
            MedicalAbbreviation | GeneralAbbreviation => CoarseLabel::Abbreviation,
        },
    }
}

/// Tie-break order when a surface form was annotated with several
/// categories equally often.
const CATEGORY_PRIORITY: [SpanCategory; 7] = [
    SpanCategory::GoogleHard,
    SpanCategory::GoogleEasy,
    SpanCategory::MedicalNameEntity,
    SpanCategory::MedicalAbbreviation,
    SpanCategory::GeneralAbbreviation,
    SpanCategory::GeneralComplex,
    SpanCategory::MultiSense,
];

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: HashMap<String, usize>,
    category: Option<SpanCategory>,
}

/// Case-folded token sequences mapped to a category, stored as a token trie.
#[derive(Debug, Clone)]
pub struct Lexicon {
    nodes: Vec<TrieNode>,
    entries: BTreeMap<Vec<String>, SpanCategory>,
    max_entry_len: usize,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            nodes: vec![TrieNode::default()],
            entries: BTreeMap::new(),
            max_entry_len: 0,
        }
    }
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Lexicon {
    pub fn insert<S: AsRef<str>>(&mut self, surface: &[S], category: SpanCategory) -> Result<()> {
        if surface.is_empty() || surface.iter().any(|t| t.as_ref().is_empty()) {
            return Err(Error::InvalidArgument("empty lexicon entry".into()));
        }
        let key: Vec<String> = surface.iter().map(|t| t.as_ref().to_lowercase()).collect();
        let mut node = 0;
        for tok in &key {
            node = match self.nodes[node].children.get(tok) {
                Some(&next) => next,
                None => {
                    self.nodes.push(TrieNode::default());
                    let next = self.nodes.len() - 1;
                    self.nodes[node].children.insert(tok.clone(), next);
                    next
                }
            };
        }
        self.nodes[node].category = Some(category);
        self.max_entry_len = self.max_entry_len.max(key.len());
        self.entries.insert(key, category);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_entry_len(&self) -> usize {
        self.max_entry_len
    }

    pub fn get<S: AsRef<str>>(&self, surface: &[S]) -> Option<SpanCategory> {
        let key: Vec<String> = surface.iter().map(|t| t.as_ref().to_lowercase()).collect();
        self.entries.get(&key).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[String], SpanCategory)> {
        self.entries.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Longest entry starting at `tokens[start]`: (length, category).
    fn longest_match(&self, tokens: &[String], start: usize) -> Option<(usize, SpanCategory)> {
        let mut node = 0;
        let mut best = None;
        for (offset, tok) in tokens[start..].iter().enumerate() {
            match self.nodes[node].children.get(tok) {
                Some(&next) => node = next,
                None => break,
            }
            if let Some(cat) = self.nodes[node].category {
                best = Some((offset + 1, cat));
            }
        }
        best
    }

    /// Reads `surface<TAB>category` lines, surface tokens space-separated.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lex = Lexicon::default();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| Error::Malformed {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let (surface, cat) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected surface<TAB>category".into()))?;
            let cat: SpanCategory = cat.trim().parse().map_err(|e: Error| malformed(e.to_string()))?;
            let toks: Vec<&str> = surface.split(' ').filter(|t| !t.is_empty()).collect();
            lex.insert(&toks, cat).map_err(|e| malformed(e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .map(|(k, c)| format!("{}\t{}\n", k.join(" "), c))
            .collect()
    }
}

/// Builds a lexicon from the gold spans of `train`. A surface form needs
/// `min_count` occurrences; its category is the majority label.
pub fn build_lexicon(train: &Corpus, min_count: usize) -> Result<Lexicon> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training corpus".into()));
    }
    let mut tallies: BTreeMap<Vec<String>, [usize; 7]> = BTreeMap::new();
    for s in train {
        for span in &s.spans {
            let key: Vec<String> = s.tokens[span.start..span.end]
                .iter()
                .map(|t| t.to_lowercase())
                .collect();
            let idx = SpanCategory::ALL
                .iter()
                .position(|&c| c == span.category)
                .expect("category in ALL");
            tallies.entry(key).or_insert([0; 7])[idx] += 1;
        }
    }

    let mut lex = Lexicon::default();
    for (key, counts) in tallies {
        let total: usize = counts.iter().sum();
        if total < min_count.max(1) {
            continue;
        }
        let count_of = |c: SpanCategory| counts[SpanCategory::ALL.iter().position(|&x| x == c).unwrap()];
        let best = CATEGORY_PRIORITY
            .iter()
            .copied()
            .fold(None::<(SpanCategory, usize)>, |best, c| match best {
                Some((_, n)) if n >= count_of(c) => best,
                _ => Some((c, count_of(c))),
            })
            .map(|(c, _)| c)
            .expect("non-empty priority list");
        lex.insert(&key, best)?;
    }
    Ok(lex)
}

/// Case-folded words that are never tagged as abbreviations.
#[derive(Debug, Clone, Default)]
pub struct CommonWords(HashSet<String>);

impl CommonWords {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        CommonWords(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(CommonWords::new(text.lines().map(str::trim).filter(|l| !l.is_empty())))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&word.to_lowercase())
    }
}

#[derive(Debug, Clone)]
pub struct Tagger<'a> {
    pub lexicon: &'a Lexicon,
    pub common_words: &'a CommonWords,
    /// Tag unmatched all-caps tokens of 2-6 letters as medical abbreviations.
    /// Case-sensitive by nature.
    pub abbreviation_heuristic: bool,
}

impl<'a> Tagger<'a> {
    pub fn new(lexicon: &'a Lexicon, common_words: &'a CommonWords) -> Self {
        Tagger {
            lexicon,
            common_words,
            abbreviation_heuristic: true,
        }
    }

    /// Greedy leftmost-longest lexicon matching, then the abbreviation rule.
    pub fn tag<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<ComplexSpan> {
        let folded: Vec<String> = tokens.iter().map(|t| t.as_ref().to_lowercase()).collect();
        let mut spans = Vec::new();
        let mut i = 0;
        while i < folded.len() {
            if let Some((len, cat)) = self.lexicon.longest_match(&folded, i) {
                spans.push(ComplexSpan::new(i, i + len, cat));
                i += len;
                continue;
            }
            let tok = tokens[i].as_ref();
            if self.abbreviation_heuristic && looks_like_abbreviation(tok) && !self.common_words.contains(tok) {
                spans.push(ComplexSpan::new(i, i + 1, SpanCategory::MedicalAbbreviation));
            }
            i += 1;
        }
        spans
    }
}

fn looks_like_abbreviation(tok: &str) -> bool {
    let n = tok.chars().count();
    (2..=6).contains(&n) && tok.chars().all(|c| c.is_alphabetic() && c.is_uppercase())
}

pub fn tag<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon, common_words: &CommonWords) -> Vec<ComplexSpan> {
    Tagger::new(lexicon, common_words).tag(tokens)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Counts {
    pub n_spans: usize,
    /// Sum of span lengths in tokens.
    pub n_tokens: usize,
    /// Share of the sentence's word tokens covered by spans.
    pub pct_tokens: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JargonCounts {
    pub granularity: Granularity,
    pub by_label: BTreeMap<CoarseLabel, Counts>,
    pub total: Counts,
}

impl JargonCounts {
    pub fn label(&self, label: CoarseLabel) -> Counts {
        self.by_label.get(&label).copied().unwrap_or_default()
    }
}

/// Span and token counts per collapsed label plus the aggregate. Every label
/// of the granularity is present, zero if absent.
pub fn count_jargon<S: AsRef<str>>(spans: &[ComplexSpan], tokens: &[S], g: Granularity) -> JargonCounts {
    let n_words = tokens.iter().filter(|t| is_word(t.as_ref())).count();
    let covered_words = |span: &ComplexSpan| {
        tokens[span.start.min(tokens.len())..span.end.min(tokens.len())]
            .iter()
            .filter(|t| is_word(t.as_ref()))
            .count()
    };
    let pct = |w: usize| if n_words == 0 { 0.0 } else { w as f64 / n_words as f64 };

    let mut by_label: BTreeMap<CoarseLabel, (usize, usize, usize)> =
        CoarseLabel::all(g).into_iter().map(|l| (l, (0, 0, 0))).collect();
    let mut total = (0, 0, 0);
    for span in spans {
        let w = covered_words(span);
        let slot = by_label.entry(collapse(span.category, g)).or_default();
        *slot = (slot.0 + 1, slot.1 + span.len(), slot.2 + w);
        total = (total.0 + 1, total.1 + span.len(), total.2 + w);
    }
    let to_counts = |(n_spans, n_tokens, w): (usize, usize, usize)| Counts {
        n_spans,
        n_tokens,
        pct_tokens: pct(w),
    };
    JargonCounts {
        granularity: g,
        by_label: by_label.into_iter().map(|(l, c)| (l, to_counts(c))).collect(),
        total: to_counts(total),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictionLine {
    id: String,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    spans: Option<Vec<ComplexSpan>>,
}

/// Reads externally produced span predictions (BIO labels or spans per id).
/// Ids absent from the file are not in the returned map.
pub fn load_external_predictions(
    path: impl AsRef<Path>,
    corpus: &Corpus,
) -> Result<HashMap<String, Vec<ComplexSpan>>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let by_id = corpus.by_id();
    let mut out = HashMap::new();

    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let pred: PredictionLine = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let sentence = by_id.get(pred.id.as_str()).ok_or_else(|| Error::Invalid {
            id: pred.id.clone(),
            message: "prediction for unknown id".into(),
        })?;
        let invalid = |message: String| Error::Invalid {
            id: pred.id.clone(),
            message,
        };
        let spans = match (pred.labels, pred.spans) {
            (Some(labels), None) => {
                if labels.len() != sentence.tokens.len() {
                    return Err(invalid(format!(
                        "{} labels for {} tokens",
                        labels.len(),
                        sentence.tokens.len()
                    )));
                }
                from_bio(&sentence.tokens, &labels)?.0
            }
            (None, Some(mut spans)) => {
                spans.sort_by_key(|s| (s.start, s.end));
                check_span_layout(&spans, sentence.tokens.len()).map_err(invalid)?;
                spans
            }
            _ => return Err(malformed("expected exactly one of \"labels\" or \"spans\"".into())),
        };
        if out.insert(pred.id.clone(), spans).is_some() {
            return Err(invalid("duplicate prediction".into()));
        }
    }
    Ok(out)
}
