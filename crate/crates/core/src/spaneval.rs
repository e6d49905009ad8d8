//! Span prediction scoring: token-level, entity-level partial and exact
//! match, all micro-averaged; plus token-level Cohen's kappa.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::corpus::{check_span_layout, ComplexSpan};
use crate::error::{Error, Result};
use crate::jargon::{collapse, CoarseLabel, Granularity};

/// Raw match counts; precision, recall and F1 derive from them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Prf {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Prf {
    pub fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        Prf { tp, fp, fn_ }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Add for Prf {
    type Output = Prf;

    fn add(self, rhs: Prf) -> Prf {
        Prf::new(self.tp + rhs.tp, self.fp + rhs.fp, self.fn_ + rhs.fn_)
    }
}

impl AddAssign for Prf {
    fn add_assign(&mut self, rhs: Prf) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for Prf {
    fn sum<I: Iterator<Item = Prf>>(iter: I) -> Prf {
        iter.fold(Prf::default(), Add::add)
    }
}

impl Serialize for Prf {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Prf", 6)?;
        st.serialize_field("tp", &self.tp)?;
        st.serialize_field("fp", &self.fp)?;
        st.serialize_field("fn", &self.fn_)?;
        st.serialize_field("precision", &self.precision())?;
        st.serialize_field("recall", &self.recall())?;
        st.serialize_field("f1", &self.f1())?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Token,
    Partial,
    Exact,
}

impl MatchMode {
    pub const ALL: [MatchMode; 3] = [MatchMode::Token, MatchMode::Partial, MatchMode::Exact];

    pub fn as_str(self) -> &'static str {
        match self {
            MatchMode::Token => "token",
            MatchMode::Partial => "partial",
            MatchMode::Exact => "exact",
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "token" => Ok(MatchMode::Token),
            "partial" => Ok(MatchMode::Partial),
            "exact" => Ok(MatchMode::Exact),
            _ => Err(Error::InvalidArgument(format!("unknown match mode {s:?}"))),
        }
    }
}

fn check(spans: &[ComplexSpan], n_tokens: Option<usize>) -> Result<()> {
    let n = n_tokens.unwrap_or_else(|| spans.iter().map(|s| s.end).max().unwrap_or(0));
    check_span_layout(spans, n).map_err(Error::InvalidArgument)
}

fn token_labels(spans: &[ComplexSpan], n: usize, g: Granularity) -> Vec<Option<CoarseLabel>> {
    let mut labels = vec![None; n];
    for s in spans {
        let label = collapse(s.category, g);
        for slot in &mut labels[s.start..s.end] {
            *slot = Some(label);
        }
    }
    labels
}

/// Token-level counts for one sentence of `n_tokens` tokens.
pub fn token_f1(gold: &[ComplexSpan], pred: &[ComplexSpan], n_tokens: usize, g: Granularity) -> Result<Prf> {
    check(gold, Some(n_tokens))?;
    check(pred, Some(n_tokens))?;
    let gold = token_labels(gold, n_tokens, g);
    let pred = token_labels(pred, n_tokens, g);
    let mut prf = Prf::default();
    for (gl, pl) in gold.iter().zip(&pred) {
        match (gl, pl) {
            (Some(a), Some(b)) if a == b => prf.tp += 1,
            _ => {
                if pl.is_some() {
                    prf.fp += 1;
                }
                if gl.is_some() {
                    prf.fn_ += 1;
                }
            }
        }
    }
    Ok(prf)
}

/// One-to-one greedy matching in gold order; each gold span takes the
/// earliest unmatched prediction accepted by `accept`.
fn greedy_match(
    gold: &[ComplexSpan],
    pred: &[ComplexSpan],
    g: Granularity,
    accept: impl Fn(&ComplexSpan, &ComplexSpan) -> bool,
) -> Prf {
    let mut used = vec![false; pred.len()];
    let mut tp = 0;
    for gs in gold {
        let gl = collapse(gs.category, g);
        let hit = pred
            .iter()
            .enumerate()
            .find(|(j, ps)| !used[*j] && collapse(ps.category, g) == gl && accept(gs, ps));
        if let Some((j, _)) = hit {
            used[j] = true;
            tp += 1;
        }
    }
    Prf::new(tp, pred.len() - tp, gold.len() - tp)
}

/// Entity-level partial match: same collapsed type and at least one shared token.
pub fn entity_partial_f1(gold: &[ComplexSpan], pred: &[ComplexSpan], g: Granularity) -> Result<Prf> {
    check(gold, None)?;
    check(pred, None)?;
    Ok(greedy_match(gold, pred, g, |a, b| a.overlaps(b)))
}

/// Entity-level exact match: identical boundaries and collapsed type.
pub fn entity_exact_f1(gold: &[ComplexSpan], pred: &[ComplexSpan], g: Granularity) -> Result<Prf> {
    check(gold, None)?;
    check(pred, None)?;
    Ok(greedy_match(gold, pred, g, |a, b| a.start == b.start && a.end == b.end))
}

/// Per-sentence evaluation input.
#[derive(Debug, Clone, Copy)]
pub struct SpanPair<'a> {
    pub n_tokens: usize,
    pub gold: &'a [ComplexSpan],
    pub pred: &'a [ComplexSpan],
}

pub fn score_pair(pair: &SpanPair<'_>, mode: MatchMode, g: Granularity) -> Result<Prf> {
    match mode {
        MatchMode::Token => token_f1(pair.gold, pair.pred, pair.n_tokens, g),
        MatchMode::Partial => entity_partial_f1(pair.gold, pair.pred, g),
        MatchMode::Exact => entity_exact_f1(pair.gold, pair.pred, g),
    }
}

/// Micro-averaged counts over a corpus.
pub fn evaluate<'a, I>(pairs: I, mode: MatchMode, g: Granularity) -> Result<Prf>
where
    I: IntoIterator<Item = SpanPair<'a>>,
{
    pairs.into_iter().map(|p| score_pair(&p, mode, g)).sum()
}

/// Output row `{granularity, match-mode, tp, fp, fn, p, r, f1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanEvalRow {
    pub granularity: Granularity,
    #[serde(rename = "match-mode")]
    pub match_mode: MatchMode,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub p: f64,
    pub r: f64,
    pub f1: f64,
}

impl SpanEvalRow {
    pub fn new(granularity: Granularity, match_mode: MatchMode, prf: Prf) -> Self {
        SpanEvalRow {
            granularity,
            match_mode,
            tp: prf.tp,
            fp: prf.fp,
            fn_: prf.fn_,
            p: prf.precision(),
            r: prf.recall(),
            f1: prf.f1(),
        }
    }
}

/// Evaluates every (granularity, mode) combination requested.
pub fn evaluate_all(
    pairs: &[SpanPair<'_>],
    granularities: &[Granularity],
    modes: &[MatchMode],
) -> Result<Vec<SpanEvalRow>> {
    let mut rows = Vec::new();
    for &g in granularities {
        for &m in modes {
            let prf = evaluate(pairs.iter().copied(), m, g)?;
            rows.push(SpanEvalRow::new(g, m, prf));
        }
    }
    Ok(rows)
}

/// Cohen's kappa over the flattened token label streams of two annotators.
pub fn cohen_kappa_tokens<L, S>(a: &[S], b: &[S]) -> Result<f64>
where
    L: Eq + Hash,
    S: AsRef<[L]>,
{
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} sentences", a.len(), b.len())));
    }
    let mut n = 0usize;
    let mut agree = 0usize;
    let mut marg: HashMap<&L, (usize, usize)> = HashMap::new();
    for (i, (sa, sb)) in a.iter().zip(b).enumerate() {
        let (sa, sb) = (sa.as_ref(), sb.as_ref());
        if sa.len() != sb.len() {
            return Err(Error::LengthMismatch(format!(
                "sentence {i}: {} vs {} labels",
                sa.len(),
                sb.len()
            )));
        }
        for (x, y) in sa.iter().zip(sb) {
            n += 1;
            if x == y {
                agree += 1;
            }
            marg.entry(x).or_default().0 += 1;
            marg.entry(y).or_default().1 += 1;
        }
    }
    if n == 0 {
        return Err(Error::Undefined("no labels".into()));
    }
    let nf = n as f64;
    let p_o = agree as f64 / nf;
    let p_e: f64 = marg.values().map(|&(ca, cb)| (ca as f64 / nf) * (cb as f64 / nf)).sum();
    if (1.0 - p_e).abs() < 1e-12 {
        return Err(Error::Undefined("chance agreement is 1 (single label)".into()));
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
