use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use medread_core::corpus::{
    load_corpus, per_source_summary, to_jsonl_string, validate as validate_corpus, AnnotatedSentence, ComplexSpan,
    Corpus, Split, Violation,
};
use medread_core::features::{extract, ResourceTables, FEATURE_IDS};
use medread_core::jargon::{
    build_lexicon, count_jargon, load_external_predictions, CoarseLabel, CommonWords, Counts, Granularity, Lexicon,
    Tagger,
};
use medread_core::metrics::{tune_alpha as fit_alpha, AlphaTable, DevPoint, Grid, MetricKind, UnigramProvider};
use medread_core::scoring::Scorer;
use medread_core::spaneval::{evaluate_all, MatchMode, SpanPair};
use medread_core::stats::{
    feature_correlations, grouped_correlation, length_bucketed_correlation, pearson, word_count, BootstrapConfig,
    GroupBy, GroupedReport, LengthBuckets, Statistic, DEFAULT_SEED,
};
use rayon::prelude::*;
use serde_json::json;

use crate::ingest::{map_record, read_records, FieldMapping};
use crate::output::{emit, write_atomic, Cell, Format, Table};
use crate::{CliError, Options};

#[derive(Debug, Clone, PartialEq)]
pub enum JargonSource {
    Gold,
    Lexicon,
    File(PathBuf),
}

impl std::str::FromStr for JargonSource {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "gold" => Ok(JargonSource::Gold),
            "lexicon" => Ok(JargonSource::Lexicon),
            _ => match s.strip_prefix("file=") {
                Some(p) if !p.is_empty() => Ok(JargonSource::File(PathBuf::from(p))),
                _ => Err(CliError::Usage(format!("--jargon must be gold, lexicon or file=PATH, got {s:?}"))),
            },
        }
    }
}

/// `None` selects every split.
type SplitFilter = Option<Split>;

/// Validated options for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    split: Option<SplitFilter>,
    pub metrics: Vec<MetricKind>,
    pub alpha_file: Option<PathBuf>,
    pub grid: Grid,
    pub jargon: JargonSource,
    pub lexicon: Option<PathBuf>,
    pub resources: Option<PathBuf>,
    pub granularities: Vec<Granularity>,
    pub match_modes: Vec<MatchMode>,
    pub group_by: GroupBy,
    pub bootstrap: Option<BootstrapConfig>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
}

fn usage<E: std::fmt::Display>(flag: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Usage(format!("--{flag}: {e}"))
}

fn parse_all<T: std::str::FromStr>(values: &[String], flag: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    values.iter().map(|v| v.trim().parse::<T>().map_err(usage(flag))).collect()
}

fn require_exists(path: &Option<PathBuf>, flag: &str) -> Result<(), CliError> {
    match path {
        Some(p) if !p.exists() => Err(CliError::Io(format!("--{flag} {} does not exist", p.display()))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn resolve(o: Options) -> Result<Self, CliError> {
        let split = match o.split.as_deref() {
            None => None,
            Some("all") => Some(None),
            Some(s) => Some(Some(s.parse::<Split>().map_err(usage("split"))?)),
        };
        let grid = match &o.grid {
            Some(g) => g.parse::<Grid>().map_err(usage("grid"))?,
            None => Grid::default(),
        };
        let jargon = match &o.jargon {
            Some(j) => j.parse()?,
            None => JargonSource::Gold,
        };
        let level = o.level.unwrap_or(0.95);
        if !(level > 0.0 && level < 1.0) {
            return Err(CliError::Usage(format!("--level must be in (0, 1), got {level}")));
        }
        let bootstrap = match o.bootstrap {
            None | Some(0) => None,
            Some(n) if n < 100 => {
                return Err(CliError::Usage(format!("--bootstrap needs at least 100 resamples, got {n}")))
            }
            Some(iters) => Some(BootstrapConfig {
                iters,
                level,
                seed: o.seed.unwrap_or(DEFAULT_SEED),
            }),
        };
        if o.jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        require_exists(&o.corpus, "corpus")?;
        require_exists(&o.alpha_file, "alpha-file")?;
        require_exists(&o.lexicon, "lexicon")?;
        require_exists(&o.resources, "resources")?;
        if let JargonSource::File(p) = &jargon {
            require_exists(&Some(p.clone()), "jargon")?;
        }

        Ok(RunConfig {
            corpus: o.corpus,
            split,
            metrics: parse_all(&o.metric, "metric")?,
            alpha_file: o.alpha_file,
            grid,
            jargon,
            lexicon: o.lexicon,
            resources: o.resources,
            granularities: parse_all(&o.granularity, "granularity")?,
            match_modes: parse_all(&o.match_mode, "match")?,
            group_by: match &o.group_by {
                Some(g) => g.parse().map_err(usage("group-by"))?,
                None => GroupBy::Source,
            },
            bootstrap,
            out: o.out,
            format: o.format.as_deref().map(str::parse).transpose().map_err(usage("format"))?,
            jobs: o.jobs,
        })
    }

    fn split_or(&self, default: SplitFilter) -> SplitFilter {
        self.split.unwrap_or(default)
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    fn emit_table(&self, table: &Table) -> Result<(), CliError> {
        emit(&table.render(self.format()), self.out.as_deref())
    }

    fn load_corpus(&self) -> Result<Corpus, CliError> {
        let path = self.corpus.as_ref().ok_or_else(|| CliError::Usage("--corpus is required".into()))?;
        Ok(load_corpus(path, true)?.corpus)
    }

    fn resource(&self, name: &str) -> Option<PathBuf> {
        self.resources.as_ref().map(|d| d.join(name)).filter(|p| p.is_file())
    }
}

fn select(corpus: &Corpus, split: SplitFilter) -> Vec<&AnnotatedSentence> {
    corpus.iter().filter(|s| split.is_none_or(|sp| s.split == sp)).collect()
}

fn rated(sentences: Vec<&AnnotatedSentence>) -> Vec<&AnnotatedSentence> {
    sentences.into_iter().filter(|s| s.rating.is_some()).collect()
}

fn train_corpus(corpus: &Corpus) -> Corpus {
    corpus.split(Split::Train).cloned().collect()
}

fn load_lexicon(config: &RunConfig, corpus: &Corpus, min_count: usize) -> Result<Lexicon, CliError> {
    match &config.lexicon {
        Some(path) => Ok(Lexicon::load(path)?),
        None => Ok(build_lexicon(&train_corpus(corpus), min_count)?),
    }
}

fn common_words(config: &RunConfig) -> Result<CommonWords, CliError> {
    match config.resource("common2000.txt") {
        Some(path) => Ok(CommonWords::load(path)?),
        None => Ok(CommonWords::default()),
    }
}

/// Spans for every sentence from the configured jargon source.
fn jargon_spans(config: &RunConfig, corpus: &Corpus) -> Result<HashMap<String, Vec<ComplexSpan>>, CliError> {
    match &config.jargon {
        JargonSource::Gold => Ok(corpus.iter().map(|s| (s.id.clone(), s.spans.clone())).collect()),
        JargonSource::Lexicon => {
            let lexicon = load_lexicon(config, corpus, 1)?;
            let common = common_words(config)?;
            let tagger = Tagger::new(&lexicon, &common);
            Ok(corpus.sentences().par_iter().map(|s| (s.id.clone(), tagger.tag(&s.tokens))).collect())
        }
        JargonSource::File(path) => {
            let mut preds = load_external_predictions(path, corpus)?;
            for s in corpus {
                preds.entry(s.id.clone()).or_default();
            }
            Ok(preds)
        }
    }
}

/// Unigram surprisal from `unigram.tsv` in the resource directory, or from
/// word counts of the corpus train split.
fn surprisal_provider(config: &RunConfig, corpus: &Corpus) -> Result<UnigramProvider, CliError> {
    if let Some(path) = config.resource("unigram.tsv") {
        return Ok(UnigramProvider::from_tsv(path)?);
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    for s in corpus.split(Split::Train) {
        for t in s.tokens.iter().filter(|t| medread_core::analyzers::is_word(t)) {
            *counts.entry(t.to_lowercase()).or_default() += 1;
        }
    }
    Ok(UnigramProvider::from_counts(counts))
}

fn alpha_table(config: &RunConfig) -> Result<AlphaTable, CliError> {
    match &config.alpha_file {
        Some(path) => Ok(AlphaTable::load(path)?),
        None => Ok(AlphaTable::default()),
    }
}

fn metrics_or_default(config: &RunConfig, scorer: &Scorer<'_>) -> Result<Vec<MetricKind>, CliError> {
    if config.metrics.is_empty() {
        return Ok(MetricKind::ALL.into_iter().filter(|m| scorer.supports(*m)).collect());
    }
    for m in &config.metrics {
        if !scorer.supports(*m) {
            return Err(CliError::Usage(format!("{m} needs an alpha (use --alpha-file)")));
        }
    }
    Ok(config.metrics.clone())
}

/// Per-sentence values for each metric, ordered by sentence id.
fn score_sentences(
    sentences: &[&AnnotatedSentence],
    scorer: &Scorer<'_>,
    metrics: &[MetricKind],
    spans: &HashMap<String, Vec<ComplexSpan>>,
) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let mut rows = sentences
        .par_iter()
        .map(|s| {
            let n_jargon = spans.get(&s.id).map_or(0, Vec::len);
            let values = metrics
                .iter()
                .map(|&m| scorer.score(&s.tokens, m, n_jargon).map(|v| v.value))
                .collect::<medread_core::Result<Vec<f64>>>()
                .map_err(|e| CliError::Data(format!("sentence {}: {e}", s.id)))?;
            Ok((s.id.clone(), values))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(rows)
}

fn sorted_by_id(mut sentences: Vec<&AnnotatedSentence>) -> Vec<&AnnotatedSentence> {
    sentences.sort_by(|a, b| a.id.cmp(&b.id));
    sentences
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw release file (JSONL or a JSON array)
    #[arg(long)]
    input: PathBuf,
    /// TOML field mapping (identity mapping when absent)
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// id<TAB>split file overriding split assignments
    #[arg(long)]
    splits: Option<PathBuf>,
}

pub fn ingest(config: &RunConfig, args: &IngestArgs) -> Result<(), CliError> {
    let mapping = match &args.mapping {
        Some(p) => FieldMapping::load(p)?,
        None => FieldMapping::default(),
    };
    let records = read_records(&args.input)?;
    let mut sentences = Vec::with_capacity(records.len());
    let mut errors = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        match map_record(&mapping, rec, i) {
            Ok(s) => sentences.push(s),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("{e}");
        }
        return Err(CliError::Data(format!("{} records could not be mapped", errors.len())));
    }
    let mut corpus = Corpus::new(sentences);
    if let Some(path) = &args.splits {
        let splits = medread_core::corpus::read_split_file(path)?;
        corpus = corpus.with_splits(&splits)?;
    }
    let violations = validate_corpus(&corpus);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{v}");
        }
        return Err(CliError::Data(format!("{} violations", violations.len())));
    }
    emit(to_jsonl_string(&corpus).as_bytes(), config.out.as_deref())?;
    eprintln!("ingested {} sentences", corpus.len());
    Ok(())
}

pub fn validate(config: &RunConfig) -> Result<(), CliError> {
    let path = config.corpus.as_ref().ok_or_else(|| CliError::Usage("--corpus is required".into()))?;
    let report = load_corpus(path, false)?;
    let mut violations: Vec<Violation> = report.skipped;
    violations.extend(validate_corpus(&report.corpus));

    if config.out.is_some() || config.format.is_some() {
        let mut table = Table::new(["sentence_id", "rule", "message"]);
        for v in &violations {
            table.push(vec![v.sentence_id.clone().into(), v.rule.as_str().into(), v.message.clone().into()]);
        }
        config.emit_table(&table)?;
        eprintln!("{} violations", violations.len());
    } else {
        let mut text = String::new();
        for v in &violations {
            text.push_str(&format!("{v}\n"));
        }
        text.push_str(&format!("{} violations\n", violations.len()));
        emit(text.as_bytes(), None)?;
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(format!("{} violations in {}", violations.len(), path.display())))
    }
}

pub fn score(config: &RunConfig) -> Result<(), CliError> {
    let corpus = config.load_corpus()?;
    let provider = surprisal_provider(config, &corpus)?;
    let scorer = Scorer::new(Some(&provider), alpha_table(config)?);
    let metrics = metrics_or_default(config, &scorer)?;
    let spans = if metrics.iter().any(|m| m.is_jar()) {
        jargon_spans(config, &corpus)?
    } else {
        HashMap::new()
    };
    let sentences = select(&corpus, config.split_or(None));
    let scores = score_sentences(&sentences, &scorer, &metrics, &spans)?;

    let by_id = corpus.by_id();
    let mut table = Table::new(
        ["id", "source", "side", "split", "rating"]
            .into_iter()
            .map(String::from)
            .chain(metrics.iter().map(|m| m.to_string())),
    );
    for (id, values) in scores {
        let s = by_id[id.as_str()];
        let mut row: Vec<Cell> = vec![
            id.clone().into(),
            s.source.as_str().into(),
            s.side.as_str().into(),
            s.split.as_str().into(),
            s.rating.into(),
        ];
        row.extend(values.into_iter().map(Cell::from));
        table.push(row);
    }
    config.emit_table(&table)
}

#[derive(Debug, Args)]
pub struct TagArgs {
    /// Minimum occurrences of a surface form when building the lexicon
    #[arg(long, default_value_t = 1)]
    min_count: usize,
    /// Write the lexicon used for tagging to this TSV file
    #[arg(long)]
    save_lexicon: Option<PathBuf>,
    /// Disable the all-caps abbreviation rule
    #[arg(long)]
    no_abbreviations: bool,
}

pub fn tag(config: &RunConfig, args: &TagArgs) -> Result<(), CliError> {
    let corpus = config.load_corpus()?;
    let lexicon = load_lexicon(config, &corpus, args.min_count)?;
    if let Some(path) = &args.save_lexicon {
        write_atomic(path, lexicon.to_tsv().as_bytes())?;
    }
    let common = common_words(config)?;
    let tagger = Tagger {
        abbreviation_heuristic: !args.no_abbreviations,
        ..Tagger::new(&lexicon, &common)
    };
    let sentences = sorted_by_id(select(&corpus, config.split_or(None)));
    let tagged: Vec<(&AnnotatedSentence, Vec<ComplexSpan>)> =
        sentences.par_iter().map(|s| (*s, tagger.tag(&s.tokens))).collect();

    let bytes = match config.format.unwrap_or(Format::Jsonl) {
        Format::Csv => {
            let mut table = Table::new(["id", "start", "end", "category", "surface"]);
            for (s, spans) in &tagged {
                for sp in spans {
                    table.push(vec![
                        s.id.clone().into(),
                        sp.start.into(),
                        sp.end.into(),
                        sp.category.as_str().into(),
                        s.tokens[sp.start..sp.end].join(" ").into(),
                    ]);
                }
            }
            table.render(Format::Csv)
        }
        Format::Jsonl => {
            let mut out = Vec::new();
            for (s, spans) in &tagged {
                serde_json::to_writer(&mut out, &json!({"id": s.id, "spans": spans})).expect("serializable");
                out.push(b'\n');
            }
            out
        }
        Format::Json => {
            let all: Vec<_> = tagged.iter().map(|(s, spans)| json!({"id": s.id, "spans": spans})).collect();
            let mut out = serde_json::to_vec_pretty(&all).expect("serializable");
            out.push(b'\n');
            out
        }
    };
    emit(&bytes, config.out.as_deref())
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Also write the fitted weights as a metric<TAB>alpha file
    #[arg(long)]
    save_alphas: Option<PathBuf>,
}

fn tune_on(
    config: &RunConfig,
    corpus: &Corpus,
    split: SplitFilter,
    metrics: &[MetricKind],
) -> Result<Vec<(MetricKind, medread_core::metrics::AlphaFit, usize)>, CliError> {
    let provider = surprisal_provider(config, corpus)?;
    let scorer = Scorer::new(Some(&provider), AlphaTable::default());
    let spans = jargon_spans(config, corpus)?;
    let dev = rated(select(corpus, split));
    let bases: Vec<MetricKind> = metrics.iter().map(|m| m.base()).collect();
    let scores = score_sentences(&dev, &scorer, &bases, &spans)?;
    let by_id = corpus.by_id();

    let mut fits = Vec::new();
    for (j, &metric) in bases.iter().enumerate() {
        let points: Vec<DevPoint> = scores
            .iter()
            .map(|(id, values)| DevPoint {
                base: values[j],
                jargon_spans: spans.get(id).map_or(0, Vec::len),
                gold: by_id[id.as_str()].rating.expect("rated"),
            })
            .collect();
        let fit = fit_alpha(&points, metric, config.grid)?;
        fits.push((metric, fit, points.len()));
    }
    Ok(fits)
}

fn tunable(metrics: &[MetricKind]) -> Result<Vec<MetricKind>, CliError> {
    if metrics.is_empty() {
        return Ok(vec![MetricKind::Fkgl, MetricKind::Ari, MetricKind::Smog, MetricKind::Rsrs]);
    }
    metrics
        .iter()
        .map(|m| m.jar().map(|_| m.base()).ok_or_else(|| CliError::Usage(format!("{m} has no jargon weight"))))
        .collect()
}

pub fn tune_alpha(config: &RunConfig, args: &TuneArgs) -> Result<(), CliError> {
    let corpus = config.load_corpus()?;
    let metrics = tunable(&config.metrics)?;
    let fits = tune_on(config, &corpus, config.split_or(Some(Split::Dev)), &metrics)?;

    let mut alphas = AlphaTable::default();
    let mut table = Table::new(["metric", "alpha", "dev_pearson", "n"]);
    for (metric, fit, n) in &fits {
        alphas.insert(*metric, fit.alpha);
        let name = metric.jar().expect("tunable metric").to_string();
        table.push(vec![name.into(), fit.alpha.into(), fit.dev_pearson.into(), (*n).into()]);
    }
    if let Some(path) = &args.save_alphas {
        write_atomic(path, alphas.to_tsv().as_bytes())?;
    }
    config.emit_table(&table)
}

pub fn eval_spans(config: &RunConfig) -> Result<(), CliError> {
    let corpus = config.load_corpus()?;
    let preds = jargon_spans(config, &corpus)?;
    let sentences = select(&corpus, config.split_or(Some(Split::Test)));
    let pairs: Vec<SpanPair<'_>> = sentences
        .iter()
        .map(|s| SpanPair {
            n_tokens: s.tokens.len(),
            gold: &s.spans,
            pred: preds.get(&s.id).map_or(&[][..], Vec::as_slice),
        })
        .collect();
    let granularities = if config.granularities.is_empty() {
        Granularity::ALL.to_vec()
    } else {
        config.granularities.clone()
    };
    let modes = if config.match_modes.is_empty() {
        MatchMode::ALL.to_vec()
    } else {
        config.match_modes.clone()
    };
    let rows = evaluate_all(&pairs, &granularities, &modes)?;

    let mut table = Table::new(["granularity", "match", "tp", "fp", "fn", "precision", "recall", "f1"]);
    for r in rows {
        table.push(vec![
            r.granularity.as_str().into(),
            r.match_mode.as_str().into(),
            r.tp.into(),
            r.fp.into(),
            r.fn_.into(),
            r.p.into(),
            r.r.into(),
            r.f1.into(),
        ]);
    }
    config.emit_table(&table)
}

#[derive(Debug, Args)]
pub struct EvalReadabilityArgs {
    /// pearson or kendall
    #[arg(long, default_value = "pearson")]
    statistic: String,
    /// Length buckets: "quartiles" (of the dev split) or boundaries like 15,25,35
    #[arg(long)]
    buckets: Option<String>,
    /// CSV of externally computed scores: an id column plus one column per system
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Tune -Jar weights on the dev split instead of reading --alpha-file
    #[arg(long)]
    tune: bool,
}

fn read_external_scores(path: &Path) -> Result<Vec<(String, HashMap<String, f64>)>, CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(io)?;
    let headers = reader.headers().map_err(io)?.clone();
    let id_col = headers
        .iter()
        .position(|h| h == "id")
        .ok_or_else(|| CliError::Data(format!("{}: no id column", path.display())))?;
    let mut columns: Vec<(String, HashMap<String, f64>)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != id_col)
        .map(|(_, h)| (h.to_string(), HashMap::new()))
        .collect();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let id = record.get(id_col).unwrap_or_default().to_string();
        let mut col = 0;
        for (i, field) in record.iter().enumerate() {
            if i == id_col {
                continue;
            }
            if !field.trim().is_empty() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    CliError::Data(format!("{}:{}: bad score {field:?}", path.display(), line + 2))
                })?;
                columns[col].1.insert(id.clone(), v);
            }
            col += 1;
        }
    }
    Ok(columns)
}

fn buckets_from(spec: &str, corpus: &Corpus) -> Result<LengthBuckets, CliError> {
    if spec == "quartiles" {
        let counts: Vec<usize> = corpus.split(Split::Dev).map(word_count).collect();
        return Ok(LengthBuckets::quartiles(&counts)?);
    }
    let bounds = spec
        .split(',')
        .map(|b| b.trim().parse::<f64>().map_err(usage("buckets")))
        .collect::<Result<Vec<f64>, CliError>>()?;
    Ok(LengthBuckets::new(bounds)?)
}

fn push_report(table: &mut Table, system: &str, statistic: Statistic, report: &GroupedReport) {
    for row in &report.rows {
        table.push(vec![
            system.into(),
            statistic.as_str().into(),
            row.group.clone().into(),
            row.n.into(),
            row.r.into(),
            row.ci.map(|c| c.0).into(),
            row.ci.map(|c| c.1).into(),
        ]);
    }
    for (label, value) in [("mean", report.mean), ("std", report.std)] {
        table.push(vec![
            system.into(),
            statistic.as_str().into(),
            label.into(),
            report.rows.len().into(),
            value.into(),
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    for skip in &report.skipped {
        eprintln!("{system}: skipped {} (n={}): {}", skip.group, skip.n, skip.reason);
    }
}

pub fn eval_readability(config: &RunConfig, args: &EvalReadabilityArgs) -> Result<(), CliError> {
    let statistic: Statistic = args.statistic.parse().map_err(usage("statistic"))?;
    let corpus = config.load_corpus()?;
    let sentences = rated(select(&corpus, config.split_or(Some(Split::Test))));
    let gold: HashMap<String, f64> = sentences
        .iter()
        .map(|s| (s.id.clone(), s.rating.expect("rated")))
        .collect();

    let alphas = if args.tune {
        let jar: Vec<MetricKind> = config.metrics.iter().filter(|m| m.is_jar()).copied().collect();
        let mut table = AlphaTable::default();
        for (metric, fit, _) in tune_on(config, &corpus, Some(Split::Dev), &tunable(&jar)?)? {
            eprintln!("{}: alpha {} (dev r {:.4})", metric.jar().expect("tunable"), fit.alpha, fit.dev_pearson);
            table.insert(metric, fit.alpha);
        }
        table
    } else {
        alpha_table(config)?
    };
    let provider = surprisal_provider(config, &corpus)?;
    let scorer = Scorer::new(Some(&provider), alphas);

    let mut systems: Vec<(String, HashMap<String, f64>)> = Vec::new();
    let builtin = if args.scores.is_some() && config.metrics.is_empty() {
        Vec::new()
    } else {
        metrics_or_default(config, &scorer)?
    };
    if !builtin.is_empty() {
        let spans = if builtin.iter().any(|m| m.is_jar()) {
            jargon_spans(config, &corpus)?
        } else {
            HashMap::new()
        };
        let scores = score_sentences(&sentences, &scorer, &builtin, &spans)?;
        for (j, m) in builtin.iter().enumerate() {
            systems.push((m.to_string(), scores.iter().map(|(id, v)| (id.clone(), v[j])).collect()));
        }
    }
    if let Some(path) = &args.scores {
        systems.extend(read_external_scores(path)?);
    }

    let buckets = args.buckets.as_deref().map(|b| buckets_from(b, &corpus)).transpose()?;
    let mut table = Table::new(["system", "statistic", "group", "n", "r", "ci_low", "ci_high"]);
    for (name, scores) in &systems {
        let report = match &buckets {
            Some(b) => length_bucketed_correlation(
                scores,
                &gold,
                sentences.iter().copied(),
                b,
                statistic,
                config.bootstrap.as_ref(),
            )?,
            None => grouped_correlation(
                scores,
                &gold,
                sentences.iter().copied(),
                config.group_by,
                statistic,
                config.bootstrap.as_ref(),
            )?,
        };
        push_report(&mut table, name, statistic, &report);
    }
    config.emit_table(&table)
}

fn feature_rows(
    config: &RunConfig,
    corpus: &Corpus,
    sentences: &[&AnnotatedSentence],
) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let dir = config
        .resources
        .as_ref()
        .ok_or_else(|| CliError::Usage("--resources (or MEDREAD_RESOURCES) is required".into()))?;
    let tables = ResourceTables::load(dir)?;
    let spans = jargon_spans(config, corpus)?;
    let mut rows = sentences
        .par_iter()
        .map(|s| {
            let sp = spans.get(&s.id).map_or(&[][..], Vec::as_slice);
            Ok((s.id.clone(), extract(s, &tables, sp)?.0))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(rows)
}

pub fn features(config: &RunConfig) -> Result<(), CliError> {
    let corpus = config.load_corpus()?;
    let sentences = select(&corpus, config.split_or(None));
    let rows = feature_rows(config, &corpus, &sentences)?;
    let mut table = Table::new(std::iter::once("id").chain(FEATURE_IDS));
    for (id, values) in rows {
        let mut row: Vec<Cell> = vec![id.into()];
        row.extend(values.into_iter().map(Cell::from));
        table.push(row);
    }
    config.emit_table(&table)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReportKind {
    /// Rating distribution and jargon density per source and side
    Summary,
    /// Correlation of jargon counts with gold readability
    JargonCorrelations,
    /// Correlation of every extracted feature with gold readability, ranked
    FeatureCorrelations,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(value_enum)]
    kind: ReportKind,
}

pub fn report(config: &RunConfig, args: &ReportArgs) -> Result<(), CliError> {
    let corpus = config.load_corpus()?;
    let sentences = select(&corpus, config.split_or(None));
    let table = match args.kind {
        ReportKind::Summary => {
            let subset: Corpus = sentences.into_iter().cloned().collect();
            let mut table = Table::new([
                "source",
                "side",
                "n",
                "mean_rating",
                "q1",
                "median",
                "q3",
                "medical_per_sentence",
                "general_multisense_per_sentence",
                "abbreviation_per_sentence",
            ]);
            for r in per_source_summary(&subset) {
                table.push(vec![
                    r.source.as_str().into(),
                    r.side.as_str().into(),
                    r.n.into(),
                    r.mean_rating.into(),
                    r.q1.into(),
                    r.median.into(),
                    r.q3.into(),
                    r.medical_per_sentence.into(),
                    r.general_multisense_per_sentence.into(),
                    r.abbreviation_per_sentence.into(),
                ]);
            }
            table
        }
        ReportKind::JargonCorrelations => jargon_correlations(config, &corpus, rated(sentences))?,
        ReportKind::FeatureCorrelations => {
            let sentences = rated(sentences);
            let gold: HashMap<String, f64> =
                sentences.iter().map(|s| (s.id.clone(), s.rating.expect("rated"))).collect();
            let rows: HashMap<String, Vec<f64>> = feature_rows(config, &corpus, &sentences)?.into_iter().collect();
            let mut table = Table::new(["feature", "n", "r"]);
            for fc in feature_correlations(&FEATURE_IDS, &rows, &gold) {
                table.push(vec![fc.feature.into(), fc.n.into(), fc.r.into()]);
            }
            table
        }
    };
    config.emit_table(&table)
}

fn jargon_correlations(
    config: &RunConfig,
    corpus: &Corpus,
    mut sentences: Vec<&AnnotatedSentence>,
) -> Result<Table, CliError> {
    sentences.sort_by(|a, b| a.id.cmp(&b.id));
    let spans = jargon_spans(config, corpus)?;
    let gold: Vec<f64> = sentences.iter().map(|s| s.rating.expect("rated")).collect();
    let mut table = Table::new(["granularity", "label", "measure", "n", "r"]);

    for g in [Granularity::ThreeClass, Granularity::SevenCategory] {
        let counts: Vec<_> = sentences
            .iter()
            .map(|s| count_jargon(spans.get(&s.id).map_or(&[][..], Vec::as_slice), &s.tokens, g))
            .collect();
        let mut series: Vec<(String, Vec<Counts>)> = CoarseLabel::all(g)
            .into_iter()
            .map(|l| (l.as_str().to_string(), counts.iter().map(|c| c.label(l)).collect()))
            .collect();
        if g == Granularity::ThreeClass {
            series.insert(0, ("all".to_string(), counts.iter().map(|c| c.total).collect()));
        }
        for (label, cs) in &series {
            let measures: [(&str, fn(&Counts) -> f64); 3] = [
                ("spans", |c| c.n_spans as f64),
                ("tokens", |c| c.n_tokens as f64),
                ("token_pct", |c| c.pct_tokens),
            ];
            for (measure, value) in measures {
                let x: Vec<f64> = cs.iter().map(value).collect();
                table.push(vec![
                    g.as_str().into(),
                    label.clone().into(),
                    measure.into(),
                    x.len().into(),
                    pearson(&x, &gold).ok().into(),
                ]);
            }
        }
    }
    Ok(table)
}
