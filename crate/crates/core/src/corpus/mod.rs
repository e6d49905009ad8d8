//! Annotated sentence model, the JSONL corpus format, and validation.

mod bio;
mod source;
mod summary;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bio::{from_bio, to_bio, BioLabel, RepairNote};
pub use source::Source;
pub use summary::{per_source_summary, SummaryRow};

/// Lowest and highest numeric rating a sentence may carry ("1-" and "6+").
pub const RATING_MIN: f64 = 0.7;
pub const RATING_MAX: f64 = 6.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Complex,
    Simple,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Complex => "complex",
            Side::Simple => "simple",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(Side::Complex),
            "simple" => Ok(Side::Simple),
            _ => Err(Error::InvalidArgument(format!("unknown side {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidArgument(format!("unknown split {s:?}"))),
        }
    }
}

/// The seven kinds of complex span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SpanCategory {
    GoogleEasy,
    GoogleHard,
    MedicalNameEntity,
    GeneralComplex,
    MultiSense,
    MedicalAbbreviation,
    GeneralAbbreviation,
}

impl SpanCategory {
    pub const ALL: [SpanCategory; 7] = [
        SpanCategory::GoogleEasy,
        SpanCategory::GoogleHard,
        SpanCategory::MedicalNameEntity,
        SpanCategory::GeneralComplex,
        SpanCategory::MultiSense,
        SpanCategory::MedicalAbbreviation,
        SpanCategory::GeneralAbbreviation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SpanCategory::GoogleEasy => "google-easy",
            SpanCategory::GoogleHard => "google-hard",
            SpanCategory::MedicalNameEntity => "medical-name-entity",
            SpanCategory::GeneralComplex => "general-complex",
            SpanCategory::MultiSense => "multi-sense",
            SpanCategory::MedicalAbbreviation => "medical-abbreviation",
            SpanCategory::GeneralAbbreviation => "general-abbreviation",
        }
    }
}

impl fmt::Display for SpanCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpanCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpanCategory::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

impl TryFrom<String> for SpanCategory {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<SpanCategory> for String {
    fn from(value: SpanCategory) -> Self {
        value.as_str().to_string()
    }
}

/// A half-open token range `[start, end)` with its category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComplexSpan {
    pub start: usize,
    pub end: usize,
    pub category: SpanCategory,
}

impl ComplexSpan {
    pub fn new(start: usize, end: usize, category: SpanCategory) -> Self {
        ComplexSpan {
            start,
            end,
            category,
        }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &ComplexSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub id: String,
    pub source: Source,
    pub side: Side,
    pub split: Split,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub rating: Option<f64>,
    #[serde(default)]
    pub spans: Vec<ComplexSpan>,
}

const FIELDS: [&str; 7] = ["id", "source", "side", "split", "tokens", "rating", "spans"];
const SPAN_FIELDS: [&str; 3] = ["start", "end", "category"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    EmptyId,
    EmptyTokens,
    BadToken,
    RatingRange,
    SpanOrder,
    SpanBounds,
    SpanUnsorted,
    SpanOverlap,
    DuplicateId,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::EmptyId => "empty-id",
            Rule::EmptyTokens => "empty-tokens",
            Rule::BadToken => "bad-token",
            Rule::RatingRange => "rating-range",
            Rule::SpanOrder => "span-order",
            Rule::SpanBounds => "span-bounds",
            Rule::SpanUnsorted => "span-unsorted",
            Rule::SpanOverlap => "span-overlap",
            Rule::DuplicateId => "duplicate-id",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub sentence_id: String,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.sentence_id, self.rule, self.message)
    }
}

impl AnnotatedSentence {
    /// Record-local invariant checks (everything except id uniqueness).
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |rule: Rule, message: String| {
            out.push(Violation {
                sentence_id: self.id.clone(),
                rule,
                message,
            })
        };

        if self.id.is_empty() {
            push(Rule::EmptyId, "id is empty".into());
        }
        if self.tokens.is_empty() {
            push(Rule::EmptyTokens, "sentence has no tokens".into());
        }
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                push(
                    Rule::BadToken,
                    format!("token {i} ({tok:?}) is empty or contains whitespace"),
                );
            }
        }
        if let Some(r) = self.rating {
            if !r.is_finite() || !(RATING_MIN..=RATING_MAX).contains(&r) {
                push(
                    Rule::RatingRange,
                    format!("rating {r} outside [{RATING_MIN}, {RATING_MAX}]"),
                );
            }
        }
        check_spans(&self.spans, self.tokens.len(), &mut push);
        out
    }
}

fn check_spans(spans: &[ComplexSpan], n_tokens: usize, push: &mut impl FnMut(Rule, String)) {
    for (i, span) in spans.iter().enumerate() {
        if span.start >= span.end {
            push(
                Rule::SpanOrder,
                format!(
                    "span {i} ({}, {}): start < end violated",
                    span.start, span.end
                ),
            );
        }
        if span.end > n_tokens {
            push(
                Rule::SpanBounds,
                format!(
                    "span {i} ({}, {}) exceeds {n_tokens} tokens",
                    span.start, span.end
                ),
            );
        }
    }
    for (i, pair) in spans.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if b.start < a.start {
            push(
                Rule::SpanUnsorted,
                format!("span {} starts before span {i}", i + 1),
            );
        }
        if a.overlaps(b) {
            push(
                Rule::SpanOverlap,
                format!(
                    "spans ({}, {}) and ({}, {}) overlap",
                    a.start, a.end, b.start, b.end
                ),
            );
        }
    }
}

/// Checks that `spans` is a valid layout over `n_tokens` tokens: ordered,
/// in bounds and non-overlapping.
pub fn check_span_layout(spans: &[ComplexSpan], n_tokens: usize) -> Result<(), String> {
    let mut first = None;
    check_spans(spans, n_tokens, &mut |_, msg| {
        first.get_or_insert(msg);
    });
    match first {
        Some(msg) => Err(msg),
        None => Ok(()),
    }
}

/// An ordered collection of sentences. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    sentences: Vec<AnnotatedSentence>,
}

impl Corpus {
    pub fn new(sentences: Vec<AnnotatedSentence>) -> Self {
        Corpus { sentences }
    }

    pub fn sentences(&self) -> &[AnnotatedSentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AnnotatedSentence> {
        self.sentences.iter()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &AnnotatedSentence> {
        self.sentences.iter().filter(move |s| s.split == split)
    }

    pub fn get(&self, id: &str) -> Option<&AnnotatedSentence> {
        self.sentences.iter().find(|s| s.id == id)
    }

    pub fn by_id(&self) -> HashMap<&str, &AnnotatedSentence> {
        self.sentences.iter().map(|s| (s.id.as_str(), s)).collect()
    }

    pub fn into_sentences(self) -> Vec<AnnotatedSentence> {
        self.sentences
    }

    /// Replaces split assignments for the ids in `splits`.
    pub fn with_splits(mut self, splits: &HashMap<String, Split>) -> Result<Corpus> {
        let known: HashSet<&str> = self.sentences.iter().map(|s| s.id.as_str()).collect();
        if let Some(missing) = splits.keys().find(|id| !known.contains(id.as_str())) {
            return Err(Error::Invalid {
                id: missing.clone(),
                message: "split assignment for unknown id".into(),
            });
        }
        for s in &mut self.sentences {
            if let Some(split) = splits.get(&s.id) {
                s.split = *split;
            }
        }
        Ok(self)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a AnnotatedSentence;
    type IntoIter = std::slice::Iter<'a, AnnotatedSentence>;

    fn into_iter(self) -> Self::IntoIter {
        self.sentences.iter()
    }
}

impl FromIterator<AnnotatedSentence> for Corpus {
    fn from_iter<T: IntoIterator<Item = AnnotatedSentence>>(iter: T) -> Self {
        Corpus::new(iter.into_iter().collect())
    }
}

/// Every invariant violation in the corpus, including duplicate ids.
pub fn validate(corpus: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for s in corpus {
        out.extend(s.violations());
        if !seen.insert(s.id.as_str()) {
            out.push(Violation {
                sentence_id: s.id.clone(),
                rule: Rule::DuplicateId,
                message: format!("id {:?} appears more than once", s.id),
            });
        }
    }
    out
}

/// Result of reading a corpus file. `skipped` is only non-empty in lenient mode.
#[derive(Debug, Clone)]
pub struct LoadReport {
    pub corpus: Corpus,
    pub skipped: Vec<Violation>,
}

pub fn load_corpus(path: impl AsRef<Path>, strict: bool) -> Result<LoadReport> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut sentences = Vec::new();
    let mut skipped = Vec::new();
    let mut seen = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if strict {
            if let Some(field) = unknown_field(&value) {
                return Err(malformed(format!("unknown field {field:?}")));
            }
        }
        let sentence: AnnotatedSentence =
            serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;

        let mut problems = sentence.violations();
        if !seen.insert(sentence.id.clone()) {
            problems.push(Violation {
                sentence_id: sentence.id.clone(),
                rule: Rule::DuplicateId,
                message: format!("id {:?} appears more than once", sentence.id),
            });
        }
        if problems.is_empty() {
            sentences.push(sentence);
        } else if strict {
            let first = &problems[0];
            return Err(Error::Invalid {
                id: first.sentence_id.clone(),
                message: format!("line {lineno}: [{}] {}", first.rule, first.message),
            });
        } else {
            skipped.extend(problems);
        }
    }

    Ok(LoadReport {
        corpus: Corpus::new(sentences),
        skipped,
    })
}

fn unknown_field(value: &serde_json::Value) -> Option<String> {
    let obj = value.as_object()?;
    if let Some(k) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return Some(k.clone());
    }
    let spans = obj.get("spans")?.as_array()?;
    spans
        .iter()
        .filter_map(|s| s.as_object())
        .flat_map(|s| s.keys())
        .find(|k| !SPAN_FIELDS.contains(&k.as_str()))
        .map(|k| format!("spans.{k}"))
}

/// Writes one JSON object per line, fields in canonical order.
pub fn write_jsonl<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for s in corpus {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl_string(corpus: &Corpus) -> String {
    let mut buf = Vec::new();
    write_jsonl(corpus, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Reads an `id<TAB>split` file.
pub fn read_split_file(path: impl AsRef<Path>) -> Result<HashMap<String, Split>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let (id, split) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected id<TAB>split".into()))?;
        let split: Split = split.trim().parse().map_err(|e: Error| malformed(e.to_string()))?;
        out.insert(id.to_string(), split);
    }
    Ok(out)
}

/// Converts a CEFR rating ("3", "3+", "3-", "B1", "C2-") to the numeric scale.
/// A "+" adds 0.3 and a "-" subtracts 0.3.
pub fn cefr_to_numeric(label: &str) -> Result<f64> {
    let label = label.trim();
    let bad = || Error::InvalidArgument(format!("not a CEFR rating: {label:?}"));
    let (base, modifier) = match label.chars().last() {
        Some('+') => (&label[..label.len() - 1], 0.3),
        Some('-') => (&label[..label.len() - 1], -0.3),
        _ => (label, 0.0),
    };
    let level = match base.to_ascii_uppercase().as_str() {
        "1" | "A1" => 1.0,
        "2" | "A2" => 2.0,
        "3" | "B1" => 3.0,
        "4" | "B2" => 4.0,
        "5" | "C1" => 5.0,
        "6" | "C2" => 6.0,
        _ => return Err(bad()),
    };
    Ok(level + modifier)
}
