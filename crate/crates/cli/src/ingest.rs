//! Conversion of a raw release file into the canonical corpus format through
//! a user-supplied field mapping.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use medread_core::corpus::{cefr_to_numeric, AnnotatedSentence, ComplexSpan, Side, Source, SpanCategory, Split};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Offsets {
    #[default]
    Token,
    Char,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpanFields {
    pub start: String,
    pub end: String,
    pub category: String,
}

impl Default for SpanFields {
    fn default() -> Self {
        SpanFields {
            start: "start".into(),
            end: "end".into(),
            category: "category".into(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Defaults {
    pub source: Option<String>,
    pub side: Option<String>,
    pub split: Option<String>,
}

/// Where each canonical field lives in a raw record. Paths are dotted
/// (`meta.source`, `annotations.0.rating`).
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FieldMapping {
    pub id: String,
    pub tokens: String,
    pub text: Option<String>,
    pub source: Option<String>,
    pub side: Option<String>,
    pub split: Option<String>,
    pub rating: Option<String>,
    pub spans: Option<String>,
    pub offsets: Offsets,
    pub span: SpanFields,
    pub defaults: Defaults,
    pub source_map: HashMap<String, String>,
    pub side_map: HashMap<String, String>,
    pub split_map: HashMap<String, String>,
    pub category_map: HashMap<String, String>,
}

impl Default for FieldMapping {
    fn default() -> Self {
        FieldMapping {
            id: "id".into(),
            tokens: "tokens".into(),
            text: None,
            source: Some("source".into()),
            side: Some("side".into()),
            split: Some("split".into()),
            rating: Some("rating".into()),
            spans: Some("spans".into()),
            offsets: Offsets::Token,
            span: SpanFields::default(),
            defaults: Defaults::default(),
            source_map: HashMap::new(),
            side_map: HashMap::new(),
            split_map: HashMap::new(),
            category_map: HashMap::new(),
        }
    }
}

impl FieldMapping {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

fn lookup<'a>(record: &'a Value, path: &str) -> Option<&'a Value> {
    let mut cur = record;
    for key in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.get(key)?,
            Value::Array(items) => items.get(key.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    (!cur.is_null()).then_some(cur)
}

fn scalar_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Reads a JSONL file, or a single JSON array of records.
pub fn read_records(path: &Path) -> Result<Vec<Value>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())));
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

struct RecordContext<'a> {
    record: &'a Value,
    index: usize,
}

impl RecordContext<'_> {
    fn fail(&self, message: impl std::fmt::Display) -> String {
        format!("record {}: {message}", self.index + 1)
    }

    fn field(&self, path: Option<&String>, default: Option<&String>, map: &HashMap<String, String>, what: &str) -> Result<String, String> {
        let raw = path
            .and_then(|p| lookup(self.record, p))
            .map(|v| scalar_string(v).ok_or_else(|| self.fail(format!("{what} is not a scalar"))))
            .transpose()?
            .or_else(|| default.cloned())
            .ok_or_else(|| self.fail(format!("missing {what}")))?;
        Ok(map.get(&raw).cloned().unwrap_or(raw))
    }
}

fn parse_rating(v: &Value) -> Result<f64, String> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| format!("bad rating {n}")),
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .or_else(|_| cefr_to_numeric(s))
            .map_err(|_| format!("bad rating {s:?}")),
        Value::Array(items) => {
            let values = items
                .iter()
                .filter(|x| !x.is_null())
                .map(parse_rating)
                .collect::<Result<Vec<f64>, String>>()?;
            if values.is_empty() {
                return Err("empty rating list".into());
            }
            Ok(values.iter().sum::<f64>() / values.len() as f64)
        }
        other => Err(format!("bad rating {other}")),
    }
}

/// Character ranges of each token within `text`, found left to right.
fn token_char_ranges(text: &str, tokens: &[String]) -> Result<Vec<(usize, usize)>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut ranges = Vec::with_capacity(tokens.len());
    let mut pos = 0;
    for tok in tokens {
        let needle: Vec<char> = tok.chars().collect();
        let found = (pos..=chars.len().saturating_sub(needle.len()))
            .find(|&i| chars[i..].starts_with(&needle))
            .ok_or_else(|| format!("token {tok:?} not found in text after offset {pos}"))?;
        ranges.push((found, found + needle.len()));
        pos = found + needle.len();
    }
    Ok(ranges)
}

fn char_span_to_tokens(ranges: &[(usize, usize)], start: usize, end: usize) -> Option<(usize, usize)> {
    let first = ranges.iter().position(|&(_, e)| e > start)?;
    let last = ranges.iter().rposition(|&(s, _)| s < end)?;
    (first <= last).then_some((first, last + 1))
}

fn span_parts<'a>(mapping: &FieldMapping, entry: &'a Value) -> Option<(&'a Value, &'a Value, &'a Value)> {
    match entry {
        Value::Array(items) if items.len() >= 3 => Some((&items[0], &items[1], &items[2])),
        Value::Object(_) => Some((
            lookup(entry, &mapping.span.start)?,
            lookup(entry, &mapping.span.end)?,
            lookup(entry, &mapping.span.category)?,
        )),
        _ => None,
    }
}

/// Maps one raw record. Spans are sorted by position; layout problems are
/// left for validation to report.
pub fn map_record(mapping: &FieldMapping, record: &Value, index: usize) -> Result<AnnotatedSentence, String> {
    let ctx = RecordContext { record, index };
    let id = ctx.field(Some(&mapping.id), None, &HashMap::new(), "id")?;

    let (tokens, text) = match lookup(record, &mapping.tokens) {
        Some(Value::Array(items)) => {
            let tokens = items
                .iter()
                .map(|t| scalar_string(t).ok_or_else(|| ctx.fail("non-string token")))
                .collect::<Result<Vec<String>, String>>()?;
            let text = match &mapping.text {
                Some(p) => lookup(record, p).and_then(Value::as_str).map(str::to_string),
                None => None,
            };
            (tokens, text)
        }
        Some(Value::String(s)) => (s.split_whitespace().map(str::to_string).collect(), Some(s.clone())),
        _ => return Err(ctx.fail(format!("missing tokens at {:?}", mapping.tokens))),
    };

    let source: Source = ctx
        .field(mapping.source.as_ref(), mapping.defaults.source.as_ref(), &mapping.source_map, "source")?
        .parse()
        .map_err(|e| ctx.fail(e))?;
    let side: Side = ctx
        .field(mapping.side.as_ref(), mapping.defaults.side.as_ref(), &mapping.side_map, "side")?
        .parse()
        .map_err(|e| ctx.fail(e))?;
    let split: Split = ctx
        .field(mapping.split.as_ref(), mapping.defaults.split.as_ref(), &mapping.split_map, "split")?
        .parse()
        .map_err(|e| ctx.fail(e))?;

    let rating = match mapping.rating.as_ref().and_then(|p| lookup(record, p)) {
        Some(v) => Some(parse_rating(v).map_err(|e| ctx.fail(e))?),
        None => None,
    };

    let char_ranges = match mapping.offsets {
        Offsets::Token => None,
        Offsets::Char => {
            let text = text.unwrap_or_else(|| tokens.join(" "));
            Some(token_char_ranges(&text, &tokens).map_err(|e| ctx.fail(e))?)
        }
    };

    let mut spans = Vec::new();
    let raw_spans = mapping.spans.as_ref().and_then(|p| lookup(record, p));
    for entry in raw_spans.and_then(Value::as_array).into_iter().flatten() {
        let (start, end, category) = span_parts(mapping, entry).ok_or_else(|| ctx.fail(format!("bad span {entry}")))?;
        let as_index = |v: &Value| v.as_u64().map(|n| n as usize).ok_or_else(|| ctx.fail(format!("bad span offset {v}")));
        let (start, end) = (as_index(start)?, as_index(end)?);
        let category = scalar_string(category).ok_or_else(|| ctx.fail("bad span category"))?;
        let category = mapping.category_map.get(&category).cloned().unwrap_or(category);
        let category: SpanCategory = category.parse().map_err(|e| ctx.fail(e))?;
        let (start, end) = match &char_ranges {
            None => (start, end),
            Some(ranges) => char_span_to_tokens(ranges, start, end)
                .ok_or_else(|| ctx.fail(format!("character span {start}..{end} covers no token")))?,
        };
        spans.push(ComplexSpan::new(start, end, category));
    }
    spans.sort_by_key(|s| (s.start, s.end));

    Ok(AnnotatedSentence {
        id,
        source,
        side,
        split,
        tokens,
        rating,
        spans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn default_mapping_is_identity() {
        let rec = json!({"id": "s1", "source": "wiki", "side": "simple", "split": "dev",
                         "tokens": ["A", "b"], "rating": 2.7,
                         "spans": [{"start": 0, "end": 1, "category": "google-easy"}]});
        let s = map_record(&FieldMapping::default(), &rec, 0).unwrap();
        assert_eq!(s.id, "s1");
        assert_eq!(s.rating, Some(2.7));
        assert_eq!(s.spans, vec![ComplexSpan::new(0, 1, SpanCategory::GoogleEasy)]);
    }

    #[test]
    fn renamed_fields_maps_and_cefr() {
        let mapping: FieldMapping = toml::from_str(
            r#"
            id = "sid"
            tokens = "sent"
            source = "meta.src"
            side = "meta.version"
            split = "fold"
            rating = "labels"
            spans = "jargon"
            [defaults]
            split = "train"
            [source-map]
            "Cochrane" = "cochrane"
            [side-map]
            "original" = "complex"
            [category-map]
            "abbr-medical" = "medical-abbreviation"
            "#,
        )
        .unwrap();
        let rec = json!({"sid": 7, "sent": "The LTFU rate rose .",
                         "meta": {"src": "Cochrane", "version": "original"},
                         "labels": ["3+", "B1-"],
                         "jargon": [[1, 2, "abbr-medical"]]});
        let s = map_record(&mapping, &rec, 0).unwrap();
        assert_eq!(s.id, "7");
        assert_eq!(s.source, Source::Cochrane);
        assert_eq!(s.side, Side::Complex);
        assert_eq!(s.split, Split::Train);
        assert_eq!(s.tokens.len(), 5);
        assert!((s.rating.unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(s.spans, vec![ComplexSpan::new(1, 2, SpanCategory::MedicalAbbreviation)]);
    }

    #[test]
    fn char_offsets_become_token_ranges() {
        let mapping: FieldMapping = toml::from_str("tokens = \"text\"\noffsets = \"char\"").unwrap();
        let rec = json!({"id": "c", "source": "msd", "side": "complex", "split": "test",
                         "text": "Acute renal failure occurs.",
                         "spans": [{"start": 6, "end": 19, "category": "google-easy"}]});
        let s = map_record(&mapping, &rec, 0).unwrap();
        assert_eq!(s.spans, vec![ComplexSpan::new(1, 3, SpanCategory::GoogleEasy)]);
    }

    #[test]
    fn errors_name_the_record() {
        let rec = json!({"id": "x", "tokens": ["a"], "source": "nowhere", "side": "simple", "split": "dev"});
        let err = map_record(&FieldMapping::default(), &rec, 4).unwrap_err();
        assert!(err.starts_with("record 5:"), "{err}");
        let rec = json!({"id": "x", "tokens": ["a"], "source": "wiki", "side": "simple"});
        assert!(map_record(&FieldMapping::default(), &rec, 0).unwrap_err().contains("missing split"));
    }

    #[test]
    fn token_ranges() {
        let toks: Vec<String> = ["a", "bc", "a"].iter().map(|s| s.to_string()).collect();
        assert_eq!(token_char_ranges("a  bc a", &toks).unwrap(), vec![(0, 1), (3, 5), (6, 7)]);
        assert_eq!(char_span_to_tokens(&[(0, 1), (3, 5), (6, 7)], 2, 4), Some((1, 2)));
        assert_eq!(char_span_to_tokens(&[(0, 1), (3, 5)], 1, 3), None);
    }
}
