use std::collections::BTreeMap;

use serde::Serialize;

use super::{Corpus, Side, Source};
use crate::jargon::{collapse, CoarseLabel, Granularity};
use crate::stats::quantile;

/// One (source, side) row of the per-source readability summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub source: Source,
    pub side: Side,
    pub n: usize,
    pub mean_rating: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Mean gold spans per sentence, by three-class label.
    pub medical_per_sentence: f64,
    pub general_multisense_per_sentence: f64,
    pub abbreviation_per_sentence: f64,
}

/// Rating distribution and gold jargon density per (source, side). Unrated
/// sentences are ignored; groups without any rated sentence are omitted.
pub fn per_source_summary(corpus: &Corpus) -> Vec<SummaryRow> {
    #[derive(Default)]
    struct Acc {
        ratings: Vec<f64>,
        medical: usize,
        general: usize,
        abbrev: usize,
    }

    let mut groups: BTreeMap<(Source, Side), Acc> = BTreeMap::new();
    for s in corpus {
        let Some(rating) = s.rating else { continue };
        let acc = groups.entry((s.source, s.side)).or_default();
        acc.ratings.push(rating);
        for span in &s.spans {
            match collapse(span.category, Granularity::ThreeClass) {
                CoarseLabel::Medical => acc.medical += 1,
                CoarseLabel::GeneralMultisense => acc.general += 1,
                CoarseLabel::Abbreviation => acc.abbrev += 1,
                _ => unreachable!("three-class collapse"),
            }
        }
    }

    groups
        .into_iter()
        .map(|((source, side), mut acc)| {
            acc.ratings.sort_by(f64::total_cmp);
            let n = acc.ratings.len();
            let nf = n as f64;
            SummaryRow {
                source,
                side,
                n,
                mean_rating: acc.ratings.iter().sum::<f64>() / nf,
                q1: quantile(&acc.ratings, 0.25),
                median: quantile(&acc.ratings, 0.5),
                q3: quantile(&acc.ratings, 0.75),
                medical_per_sentence: acc.medical as f64 / nf,
                general_multisense_per_sentence: acc.general as f64 / nf,
                abbreviation_per_sentence: acc.abbrev as f64 / nf,
            }
        })
        .collect()
}
