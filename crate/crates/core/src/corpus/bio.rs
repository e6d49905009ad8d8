//! BIO label sequences over the seven span categories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_span_layout, AnnotatedSentence, ComplexSpan, SpanCategory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BioLabel {
    Outside,
    Begin(SpanCategory),
    Inside(SpanCategory),
}

impl fmt::Display for BioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioLabel::Outside => f.write_str("O"),
            BioLabel::Begin(c) => write!(f, "B-{c}"),
            BioLabel::Inside(c) => write!(f, "I-{c}"),
        }
    }
}

impl FromStr for BioLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownLabel(s.to_string());
        if s == "O" {
            return Ok(BioLabel::Outside);
        }
        let (prefix, cat) = s.split_once('-').ok_or_else(unknown)?;
        let cat: SpanCategory = cat.parse().map_err(|_| unknown())?;
        match prefix {
            "B" => Ok(BioLabel::Begin(cat)),
            "I" => Ok(BioLabel::Inside(cat)),
            _ => Err(unknown()),
        }
    }
}

impl Serialize for BioLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BioLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Records an `I-` label that did not continue a span of its category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairNote {
    pub position: usize,
    pub label: String,
}

impl fmt::Display for RepairNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "orphan {} at token {} opened a new span",
            self.label, self.position
        )
    }
}

pub fn to_bio(sentence: &AnnotatedSentence) -> Result<Vec<BioLabel>> {
    check_span_layout(&sentence.spans, sentence.tokens.len()).map_err(|message| {
        Error::Invalid {
            id: sentence.id.clone(),
            message,
        }
    })?;
    let mut labels = vec![BioLabel::Outside; sentence.tokens.len()];
    for span in &sentence.spans {
        labels[span.start] = BioLabel::Begin(span.category);
        for label in &mut labels[span.start + 1..span.end] {
            *label = BioLabel::Inside(span.category);
        }
    }
    Ok(labels)
}

/// Decodes a label sequence into spans. Orphan `I-` labels start a new span
/// and are reported.
pub fn from_bio<S: AsRef<str>>(
    tokens: &[String],
    labels: &[S],
) -> Result<(Vec<ComplexSpan>, Vec<RepairNote>)> {
    if tokens.len() != labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} labels for {} tokens",
            labels.len(),
            tokens.len()
        )));
    }
    let parsed = labels
        .iter()
        .map(|l| l.as_ref().parse::<BioLabel>())
        .collect::<Result<Vec<_>>>()?;
    Ok(decode(&parsed))
}

pub(crate) fn decode(labels: &[BioLabel]) -> (Vec<ComplexSpan>, Vec<RepairNote>) {
    let mut spans = Vec::new();
    let mut notes = Vec::new();
    let mut open: Option<(usize, SpanCategory)> = None;

    for (i, label) in labels.iter().enumerate() {
        match *label {
            BioLabel::Outside => {
                if let Some((start, cat)) = open.take() {
                    spans.push(ComplexSpan::new(start, i, cat));
                }
            }
            BioLabel::Begin(cat) => {
                if let Some((start, prev)) = open.replace((i, cat)) {
                    spans.push(ComplexSpan::new(start, i, prev));
                }
            }
            BioLabel::Inside(cat) => match open {
                Some((_, prev)) if prev == cat => {}
                _ => {
                    if let Some((start, prev)) = open.replace((i, cat)) {
                        spans.push(ComplexSpan::new(start, i, prev));
                    }
                    notes.push(RepairNote {
                        position: i,
                        label: label.to_string(),
                    });
                }
            },
        }
    }
    if let Some((start, cat)) = open {
        spans.push(ComplexSpan::new(start, labels.len(), cat));
    }
    (spans, notes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Side, Source, Split};
    use proptest::prelude::*;

    fn sent(n: usize, spans: Vec<ComplexSpan>) -> AnnotatedSentence {
        AnnotatedSentence {
            id: "s".into(),
            source: Source::Wiki,
            side: Side::Simple,
            split: Split::Dev,
            tokens: (0..n).map(|i| format!("t{i}")).collect(),
            rating: None,
            spans,
        }
    }

    fn strs(labels: &[BioLabel]) -> Vec<String> {
        labels.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn no_spans_all_outside() {
        assert_eq!(strs(&to_bio(&sent(3, vec![])).unwrap()), ["O", "O", "O"]);
    }

    #[test]
    fn begin_inside_encoding() {
        let s = sent(3, vec![ComplexSpan::new(0, 2, SpanCategory::GoogleEasy)]);
        assert_eq!(
            strs(&to_bio(&s).unwrap()),
            ["B-google-easy", "I-google-easy", "O"]
        );
        let s = sent(3, vec![ComplexSpan::new(2, 3, SpanCategory::MedicalAbbreviation)]);
        assert_eq!(
            strs(&to_bio(&s).unwrap()),
            ["O", "O", "B-medical-abbreviation"]
        );
    }

    #[test]
    fn invalid_sentence_rejected() {
        let s = sent(2, vec![ComplexSpan::new(1, 3, SpanCategory::GoogleEasy)]);
        assert!(to_bio(&s).is_err());
    }

    #[test]
    fn decode_examples() {
        let toks: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let (spans, notes) = from_bio(&toks, &["O", "O", "O"]).unwrap();
        assert!(spans.is_empty() && notes.is_empty());

        let (spans, notes) = from_bio(&toks, &["B-google-easy", "I-google-easy", "O"]).unwrap();
        assert_eq!(spans, vec![ComplexSpan::new(0, 2, SpanCategory::GoogleEasy)]);
        assert!(notes.is_empty());

        let (spans, notes) = from_bio(&toks, &["O", "I-google-hard", "O"]).unwrap();
        assert_eq!(spans, vec![ComplexSpan::new(1, 2, SpanCategory::GoogleHard)]);
        assert_eq!(notes.len(), 1);
        assert_eq!(notes[0].position, 1);
    }

    #[test]
    fn category_switch_inside_repairs() {
        let toks: Vec<String> = vec!["a".into(), "b".into()];
        let (spans, notes) = from_bio(&toks, &["B-google-easy", "I-multi-sense"]).unwrap();
        assert_eq!(
            spans,
            vec![
                ComplexSpan::new(0, 1, SpanCategory::GoogleEasy),
                ComplexSpan::new(1, 2, SpanCategory::MultiSense)
            ]
        );
        assert_eq!(notes.len(), 1);
    }

    #[test]
    fn decode_errors() {
        let toks: Vec<String> = vec!["a".into()];
        assert!(matches!(
            from_bio(&toks, &["O", "O"]),
            Err(Error::LengthMismatch(_))
        ));
        assert!(matches!(
            from_bio(&toks, &["B-jargon"]),
            Err(Error::UnknownLabel(_))
        ));
        assert!(matches!(from_bio(&toks, &["X"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn fifteen_labels_parse() {
        let mut all = vec!["O".to_string()];
        for c in SpanCategory::ALL {
            all.push(format!("B-{c}"));
            all.push(format!("I-{c}"));
        }
        assert_eq!(all.len(), 15);
        for l in &all {
            assert_eq!(&l.parse::<BioLabel>().unwrap().to_string(), l);
        }
    }

    proptest! {
        #[test]
        fn round_trip((n, spans) in crate::corpus::tests_support::layout()) {
            let s = sent(n, spans.clone());
            let labels = strs(&to_bio(&s).unwrap());
            let (back, notes) = from_bio(&s.tokens, &labels).unwrap();
            prop_assert_eq!(back, spans);
            prop_assert!(notes.is_empty());
        }
    }
}
