use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;
use ttcsw::align_data::{build_alignment_examples, write_alignment_examples, AlignConfig, ALIGN_FORMAT};
use ttcsw::artifact::{write_atomic, Header};
use ttcsw::corpus::{
    corpus_stats, export_corpus_with, import_corpus, ingest_semeval, Corpus, IngestDiagnostics, Lang,
    SplitSelection,
};
use ttcsw::csw::{
    self as csw, build_csw_corpus, read_pairs, write_pairs, write_provenance, CswConfig, DictCswConfig,
    DictStrategy, PAIRS_FORMAT, PROVENANCE_FORMAT,
};
use ttcsw::lexicon::Lexicon;
use ttcsw::metrics::{all_null_baseline, render_table, MetricsOptions, MetricsReport, SingleSlotWeight};
use ttcsw::pipeline::{
    predict_corpus, read_predictions, render_sweep_tsv, score_predictions, tta_corpus, with_jobs,
    write_predictions, PREDICTIONS_FORMAT,
};
use ttcsw::tta::{TtaBackends, TtaConfig};

use crate::backends::{Backends, Role};
use crate::{CliError, Context};

const KNOWN_DATASETS: &[(&str, &str)] = &[
    ("opener_en", "en"),
    ("opener_es", "es"),
    ("multibooked_eu", "eu"),
    ("multibooked_ca", "ca"),
    ("norec", "no"),
];

/// Where corpora come from: exported corpus files or raw dataset
/// directories.
#[derive(Debug, Args)]
pub struct Source {
    /// Corpus file written by `ingest` or a builder (repeatable).
    #[arg(long = "corpus")]
    corpora: Vec<PathBuf>,
    /// Dataset name under the data directory, e.g. `opener_es` (repeatable).
    #[arg(long = "dataset")]
    datasets: Vec<String>,
    /// Dataset directory (repeatable).
    #[arg(long = "dataset-dir")]
    dataset_dirs: Vec<PathBuf>,
    /// Language of `--dataset-dir` datasets, or of unknown dataset names.
    #[arg(long)]
    lang: Option<Lang>,
    /// train, dev, test or all.
    #[arg(long, default_value = "all")]
    split: SplitSelection,
}

impl Source {
    fn data_root(ctx: &Context) -> PathBuf {
        ctx.settings
            .get("data_dir")
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("TTCSW_SEMEVAL_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("data/semeval22"))
    }

    fn lang_for(&self, name: &str) -> Result<Lang, CliError> {
        if let Some(l) = &self.lang {
            return Ok(l.clone());
        }
        KNOWN_DATASETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, l)| Lang::new(l).expect("static code"))
            .ok_or_else(|| CliError::Usage(format!("unknown dataset `{name}`: pass --lang")))
    }

    fn ingest_dir(&self, dir: &Path, lang: &Lang) -> Result<Corpus, CliError> {
        let (c, d) = ingest_semeval(dir, lang, self.split)?;
        report_ingest(&c, &d);
        Ok(c)
    }

    fn load(&self, ctx: &Context) -> Result<Vec<Corpus>, CliError> {
        let mut out = Vec::new();
        for p in &self.corpora {
            out.push(import_corpus(p)?);
        }
        for name in &self.datasets {
            let lang = self.lang_for(name)?;
            out.push(self.ingest_dir(&Self::data_root(ctx).join(name), &lang)?);
        }
        for dir in &self.dataset_dirs {
            let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let lang = self.lang_for(&name)?;
            out.push(self.ingest_dir(dir, &lang)?);
        }
        if out.is_empty() {
            return Err(CliError::Usage("no input: pass --corpus, --dataset or --dataset-dir".into()));
        }
        Ok(out)
    }

    fn load_one(&self, ctx: &Context) -> Result<Corpus, CliError> {
        let mut all = self.load(ctx)?;
        if all.len() != 1 {
            return Err(CliError::Usage(format!("expected one input corpus, got {}", all.len())));
        }
        Ok(all.remove(0))
    }
}

fn report_ingest(c: &Corpus, d: &IngestDiagnostics) {
    eprintln!(
        "{}: {} records, {} malformed, {} unknown polarity, {} empty opinions, {} span mismatches, {} renamed ids",
        c.name,
        d.records_read,
        d.malformed_records,
        d.unknown_polarity,
        d.empty_opinions,
        d.span_mismatches,
        d.renamed_ids
    );
    for n in &d.notes {
        log::info!("{}: {n}", c.name);
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("json value serializes");
    bytes.push(b'\n');
    Ok(write_atomic(path, &bytes)?)
}

fn header_json(ctx: &Context, format: &str) -> serde_json::Value {
    serde_json::to_value(Header::new(format).with_provenance(&ctx.provenance())).expect("header serializes")
}

fn batch_size(ctx: &Context, flag: Option<usize>) -> Result<usize, CliError> {
    Ok(flag
        .or(ctx.settings.parse::<usize>("max_batch")?)
        .unwrap_or(ttcsw::backends::DEFAULT_MAX_BATCH)
        .max(1))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Core(ttcsw::Error::io(dir, e)))
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    out: PathBuf,
}

pub fn ingest(ctx: &Context, a: IngestArgs) -> Result<(), CliError> {
    let c = a.source.load_one(ctx)?;
    export_corpus_with(&c, &a.out, &ctx.provenance())?;
    eprintln!("wrote {} samples to {}", c.len(), a.out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    source: Source,
    /// Also write the statistics as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

pub fn stats(ctx: &Context, a: StatsArgs) -> Result<(), CliError> {
    let corpora = a.source.load(ctx)?;
    let rows: Vec<_> = corpora.iter().map(|c| (c, corpus_stats(c))).collect();
    let width = rows.iter().map(|(c, _)| c.name.len()).max().unwrap_or(7).max(7);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$} | {:>9} {:>7} {:>8} {:>8} {:>7} | {:>8} {:>8}",
        "dataset", "sentences", "aspects", "opinions", "triplets", "empty%", "uniq-asp", "uniq-op"
    );
    for (c, s) in &rows {
        let _ = writeln!(
            out,
            "{:<width$} | {:>9} {:>7} {:>8} {:>8} {:>7.1} | {:>8} {:>8}",
            c.name,
            s.n_sentences,
            s.n_aspects,
            s.n_opinions,
            s.n_triplets,
            s.empty_label_rate * 100.0,
            s.unique_aspects,
            s.unique_opinions
        );
    }
    print!("{out}");
    if let Some(path) = a.json {
        let datasets: Vec<_> = rows
            .iter()
            .map(|(c, s)| json!({"name": c.name, "language": c.language, "split": c.split, "stats": s}))
            .collect();
        write_json(&path, &json!({"header": header_json(ctx, "ttcsw-stats"), "datasets": datasets}))?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct CswArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    target_lang: Lang,
    /// Translator spec; defaults to the configured translator.
    #[arg(long)]
    translator: Option<String>,
    /// Share of terms switched into the target language.
    #[arg(long, default_value_t = 0.5)]
    switch_rate: f64,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Keep samples whose markup could not be fully recovered, with
    /// source-language terms.
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn build_csw(ctx: &Context, a: CswArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.switch_rate) {
        return Err(CliError::Usage("--switch-rate must lie in [0, 1]".into()));
    }
    let corpus = import_corpus(&a.corpus)?;
    let mut b = Backends::new(&ctx.settings, ctx.replay)?;
    let translator = b.translator(a.translator.as_deref())?;
    let cfg = CswConfig {
        target_lang: a.target_lang.clone(),
        switch_rate: a.switch_rate,
        seed: ctx.seed,
        strict: !a.lenient,
        batch_size: batch_size(ctx, a.batch_size)?,
    };
    let built = with_jobs(ctx.jobs, || build_csw_corpus(&corpus, &translator, &cfg))?;
    b.report();
    let build = built?;
    create_dir(&a.out_dir)?;
    let prov = ctx.provenance();
    let d = &a.out_dir;
    export_corpus_with(&build.ct, &d.join("ct.jsonl"), &prov)?;
    export_corpus_with(&build.csw, &d.join("csw.jsonl"), &prov)?;
    let h = || Header::new(PROVENANCE_FORMAT).with_provenance(&prov);
    write_provenance(&d.join("ct.provenance.jsonl"), h().field("mode", "CT"), &build.ct_provenance)?;
    write_provenance(&d.join("csw.provenance.jsonl"), h().field("mode", "CSW"), &build.csw_provenance)?;
    write_pairs(
        &d.join("pairs.jsonl"),
        Header::new(PAIRS_FORMAT).with_provenance(&prov),
        &build.pairs,
    )?;
    write_json(
        &d.join("diagnostics.json"),
        &json!({"header": header_json(ctx, "ttcsw-csw-diagnostics"), "diagnostics": build.diagnostics}),
    )?;
    let g = &build.diagnostics;
    eprintln!(
        "{} input, {} retained, {} excluded, {} lossy, {} unlocatable terms, {} repaired tags, {} term pairs",
        g.n_input,
        g.n_retained,
        g.excluded,
        g.lossy,
        g.unlocatable,
        g.repaired_tags,
        build.pairs.len()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct DictCswArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Bilingual lexicon, one `source<TAB>target` pair per line.
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    target_lang: Lang,
    /// Share of words replaced.
    #[arg(long, default_value_t = 0.3)]
    ratio: f64,
    /// static or dynamic.
    #[arg(long, default_value = "static")]
    strategy: DictStrategy,
    /// Training epoch; only changes the output under the dynamic strategy.
    #[arg(long, default_value_t = 0)]
    epoch: u32,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    provenance: Option<PathBuf>,
}

pub fn build_dict_csw(ctx: &Context, a: DictCswArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.ratio) {
        return Err(CliError::Usage("--ratio must lie in [0, 1]".into()));
    }
    let corpus = import_corpus(&a.corpus)?;
    let lexicon = Lexicon::load(&a.lexicon)?;
    let cfg = DictCswConfig {
        target_lang: a.target_lang,
        ratio: a.ratio,
        strategy: a.strategy,
        seed: ctx.seed,
        epoch: a.epoch,
    };
    let build = csw::build_dict_csw(&corpus, &lexicon, &cfg)?;
    let prov = ctx.provenance();
    export_corpus_with(&build.corpus, &a.out, &prov)?;
    if let Some(p) = a.provenance {
        write_provenance(
            &p,
            Header::new(PROVENANCE_FORMAT).with_provenance(&prov).field("mode", "DICT_CSW"),
            &build.provenance,
        )?;
    }
    eprintln!(
        "wrote {} samples to {} ({} terms could not be relocated)",
        build.corpus.len(),
        a.out.display(),
        build.unlocated_terms
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Parallel term pairs written by `build-csw`.
    #[arg(long)]
    pairs: PathBuf,
    /// Source-language corpus.
    #[arg(long)]
    source: PathBuf,
    /// Translated corpus (`ct.jsonl`).
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 128)]
    window: usize,
    #[arg(long, default_value_t = 64)]
    stride: usize,
    #[arg(long, default_value_t = 0.1)]
    corrupt_rate: f64,
    #[arg(long)]
    out: PathBuf,
}

pub fn build_align(ctx: &Context, a: AlignArgs) -> Result<(), CliError> {
    let pairs = read_pairs(&a.pairs)?;
    let source = import_corpus(&a.source)?;
    let target = import_corpus(&a.target)?;
    let cfg = AlignConfig {
        window: a.window,
        stride: a.stride,
        corrupt_rate: a.corrupt_rate,
        seed: ctx.seed,
    };
    let build = build_alignment_examples(&pairs, &source, &target, &cfg)?;
    write_alignment_examples(
        &a.out,
        Header::new(ALIGN_FORMAT)
            .with_provenance(&ctx.provenance())
            .field("window", a.window)
            .field("stride", a.stride)
            .field("corrupt_rate", a.corrupt_rate),
        &build.examples,
    )?;
    eprintln!(
        "wrote {} examples ({} positive, {} corrupted, {} skipped)",
        build.examples.len(),
        build.n_positive,
        build.n_corrupted,
        build.n_skipped
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    generator: Option<String>,
    /// Training setting of the generator (CL, CT, CSW, DICT_CSW, ...),
    /// recorded in the output header.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

pub fn predict(ctx: &Context, a: PredictArgs) -> Result<(), CliError> {
    let corpus = a.source.load_one(ctx)?;
    let mut b = Backends::new(&ctx.settings, ctx.replay)?;
    let generator = b.generator(Role::Generator, a.generator.as_deref())?;
    let batch = batch_size(ctx, a.batch_size)?;
    let recs = with_jobs(ctx.jobs, || predict_corpus(&corpus, &generator, batch))?;
    b.report();
    let recs = recs?;
    let mut h = Header::new(PREDICTIONS_FORMAT)
        .with_provenance(&ctx.provenance())
        .field("corpus", &corpus.name)
        .field("tta", false);
    if let Some(m) = a.mode {
        h = h.field("mode", m);
    }
    write_predictions(&a.out, h, &recs)?;
    eprintln!("wrote {} predictions to {}", recs.len(), a.out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct TtaKnobs {
    /// Language the generator was trained on.
    #[arg(long)]
    source_lang: Option<Lang>,
    #[arg(long)]
    translator: Option<String>,
    #[arg(long)]
    aligner: Option<String>,
    #[arg(long)]
    generator: Option<String>,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    #[arg(long, default_value_t = 0.5)]
    vote_threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    min_support: f64,
    #[arg(long)]
    batch_size: Option<usize>,
}

impl TtaKnobs {
    fn config(&self, ctx: &Context, max_ngram: usize, n_candidates: usize) -> Result<TtaConfig, CliError> {
        let cfg = TtaConfig {
            max_ngram,
            top_k_phrases: self.top_k,
            n_candidates,
            vote_threshold: self.vote_threshold,
            min_support_fraction: self.min_support,
            seed: ctx.seed,
            batch_size: batch_size(ctx, self.batch_size)?,
            strict: ctx.strict,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    fn source_lang(&self, ctx: &Context) -> Result<Lang, CliError> {
        match &self.source_lang {
            Some(l) => Ok(l.clone()),
            None => Ok(ctx.settings.get("source_lang").unwrap_or("en").parse()?),
        }
    }
}

#[derive(Debug, Args)]
pub struct TtaArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    knobs: TtaKnobs,
    #[arg(long, default_value_t = 3)]
    max_ngram: usize,
    /// Augmented inputs per sample.
    #[arg(long, default_value_t = 10)]
    n_candidates: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn tta(ctx: &Context, a: TtaArgs) -> Result<(), CliError> {
    let cfg = a.knobs.config(ctx, a.max_ngram, a.n_candidates)?;
    let src = a.knobs.source_lang(ctx)?;
    let corpus = a.source.load_one(ctx)?;
    let mut b = Backends::new(&ctx.settings, ctx.replay)?;
    let translator = b.translator(a.knobs.translator.as_deref())?;
    let aligner = b.generator(Role::Aligner, a.knobs.aligner.as_deref())?;
    let generator = b.generator(Role::Generator, a.knobs.generator.as_deref())?;
    let backends = TtaBackends {
        translator: &*translator,
        aligner: &*aligner,
        generator: &*generator,
    };
    let recs = with_jobs(ctx.jobs, || tta_corpus(&corpus, &src, &backends, &cfg))?;
    b.report();
    let recs = recs?;
    let fell_back = recs.iter().filter(|r| r.diagnostics.fell_back).count();
    write_predictions(
        &a.out,
        Header::new(PREDICTIONS_FORMAT)
            .with_provenance(&ctx.provenance())
            .field("corpus", &corpus.name)
            .field("tta", &cfg),
        &recs,
    )?;
    eprintln!(
        "wrote {} predictions to {} ({} fell back to the plain prediction)",
        recs.len(),
        a.out.display(),
        fell_back
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    gold: Source,
    /// Prediction files, one per gold corpus in the same order.
    #[arg(long = "pred")]
    preds: Vec<PathBuf>,
    /// Score the system that predicts nothing.
    #[arg(long, conflicts_with = "preds")]
    all_null: bool,
    /// Score single-term triplets with half weight.
    #[arg(long)]
    half_single_slot: bool,
    /// Leave samples without gold triplets out of recall.
    #[arg(long)]
    no_empty_gold_recall: bool,
    #[arg(long)]
    json: Option<PathBuf>,
}

pub fn eval(ctx: &Context, a: EvalArgs) -> Result<(), CliError> {
    if !a.all_null && a.preds.is_empty() {
        return Err(CliError::Usage("pass --pred files or --all-null".into()));
    }
    let golds = a.gold.load(ctx)?;
    if !a.all_null && a.preds.len() != golds.len() {
        return Err(CliError::Usage(format!(
            "{} prediction files for {} gold corpora",
            a.preds.len(),
            golds.len()
        )));
    }
    let opts = MetricsOptions {
        single_slot: if a.half_single_slot {
            SingleSlotWeight::Half
        } else {
            SingleSlotWeight::Renormalize
        },
        gold_empty_in_recall: !a.no_empty_gold_recall,
    };
    let mut rows: Vec<(String, MetricsReport)> = Vec::with_capacity(golds.len());
    for (i, g) in golds.iter().enumerate() {
        let r = if a.all_null {
            all_null_baseline(g, &opts)
        } else {
            let (_, recs) = read_predictions(&a.preds[i])?;
            score_predictions(&recs, g, &opts)?
        };
        rows.push((g.name.clone(), r));
    }
    print!("{}", render_table(&rows));
    if let Some(path) = a.json {
        let items: Vec<_> = rows.iter().map(|(n, r)| json!({"dataset": n, "scores": r})).collect();
        write_json(
            &path,
            &json!({
                "header": header_json(ctx, "ttcsw-eval"),
                "system": if a.all_null { "all-null" } else { "predictions" },
                "options": opts,
                "results": items,
            }),
        )?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    knobs: TtaKnobs,
    /// Comma-separated maximum n-gram lengths.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    ngrams: Vec<usize>,
    /// Comma-separated candidate counts.
    #[arg(long, value_delimiter = ',', default_value = "5,10")]
    candidates: Vec<usize>,
    /// TSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn sweep(ctx: &Context, a: SweepArgs) -> Result<(), CliError> {
    for &m in &a.ngrams {
        a.knobs.config(ctx, m, 1)?;
    }
    let base = a.knobs.config(ctx, 1, 1)?;
    let src = a.knobs.source_lang(ctx)?;
    let corpus = a.source.load_one(ctx)?;
    let mut b = Backends::new(&ctx.settings, ctx.replay)?;
    let translator = b.translator(a.knobs.translator.as_deref())?;
    let aligner = b.generator(Role::Aligner, a.knobs.aligner.as_deref())?;
    let generator = b.generator(Role::Generator, a.knobs.generator.as_deref())?;
    let backends = TtaBackends {
        translator: &*translator,
        aligner: &*aligner,
        generator: &*generator,
    };
    let rows = with_jobs(ctx.jobs, || {
        ttcsw::pipeline::sweep(
            &corpus,
            &src,
            &backends,
            &base,
            &a.ngrams,
            &a.candidates,
            &MetricsOptions::default(),
        )
    })?;
    b.report();
    let tsv = render_sweep_tsv(&rows?);
    match a.out {
        Some(p) => {
            let text = format!("# seed={} config_digest={}\n{tsv}", ctx.seed, ctx.digest);
            write_atomic(&p, text.as_bytes())?;
        }
        None => print!("{tsv}"),
    }
    Ok(())
}
