//! Corpus-level prediction runs, prediction files and parameter sweeps.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{read_jsonl, write_jsonl, Header};
use crate::backends::{generate_batched, Generator, Task};
use crate::corpus::{Corpus, Lang, Triplet};
use crate::error::{Error, Result};
use crate::metrics::{score_against_corpus, MetricsOptions, MetricsReport};
use crate::triplet_format::parse_triplets;
use crate::tta::{tta_predict, TtaBackends, TtaConfig, TtaDiagnostics};

pub const PREDICTIONS_FORMAT: &str = "ttcsw-predictions";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub triplets: Vec<Triplet>,
    pub diagnostics: TtaDiagnostics,
}

/// Run `f` on a dedicated pool of `jobs` threads, or on the global pool
/// when `jobs` is `None`.
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Plain prediction: one generation call per batch of sentences, no
/// augmentation.
pub fn predict_corpus<G: Generator + ?Sized>(
    corpus: &Corpus,
    generator: &G,
    batch_size: usize,
) -> Result<Vec<PredictionRecord>> {
    let texts: Vec<String> = corpus.samples.iter().map(|s| s.text.clone()).collect();
    let batch = batch_size.max(1);
    let outputs: Vec<Vec<String>> = texts
        .par_chunks(batch)
        .map(|c| generate_batched(generator, c, Task::Aste, Some(&corpus.language), batch))
        .collect::<std::result::Result<_, _>>()?;
    Ok(corpus
        .samples
        .iter()
        .zip(outputs.into_iter().flatten())
        .map(|(s, o)| PredictionRecord {
            id: s.id.clone(),
            triplets: parse_triplets(&o).0,
            diagnostics: TtaDiagnostics::default(),
        })
        .collect())
}

/// Test-time augmentation over every sample, in parallel, output in
/// corpus order.
pub fn tta_corpus(
    corpus: &Corpus,
    source_lang: &Lang,
    backends: &TtaBackends<'_>,
    cfg: &TtaConfig,
) -> Result<Vec<PredictionRecord>> {
    cfg.validate()?;
    corpus
        .samples
        .par_iter()
        .map(|s| {
            let p = tta_predict(&s.text, source_lang, &corpus.language, backends, cfg)?;
            Ok(PredictionRecord {
                id: s.id.clone(),
                triplets: p.triplets,
                diagnostics: p.diagnostics,
            })
        })
        .collect()
}

pub fn write_predictions(path: &Path, header: Header, records: &[PredictionRecord]) -> Result<()> {
    write_jsonl(path, &header, records)
}

pub fn read_predictions(path: &Path) -> Result<(Header, Vec<PredictionRecord>)> {
    read_jsonl(path, PREDICTIONS_FORMAT)
}

pub fn as_pairs(records: &[PredictionRecord]) -> Vec<(String, Vec<Triplet>)> {
    records.iter().map(|r| (r.id.clone(), r.triplets.clone())).collect()
}

pub fn score_predictions(records: &[PredictionRecord], gold: &Corpus, opts: &MetricsOptions) -> Result<MetricsReport> {
    score_against_corpus(&as_pairs(records), gold, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub max_ngram: usize,
    pub n_candidates: usize,
    pub report: MetricsReport,
}

/// TTA scored on every (max_ngram, n_candidates) combination.
pub fn sweep(
    corpus: &Corpus,
    source_lang: &Lang,
    backends: &TtaBackends<'_>,
    base: &TtaConfig,
    max_ngrams: &[usize],
    n_candidates: &[usize],
    opts: &MetricsOptions,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(max_ngrams.len() * n_candidates.len());
    for &m in max_ngrams {
        for &n in n_candidates {
            let cfg = TtaConfig {
                max_ngram: m,
                n_candidates: n,
                ..base.clone()
            };
            let preds = tta_corpus(corpus, source_lang, backends, &cfg)?;
            rows.push(SweepRow {
                max_ngram: m,
                n_candidates: n,
                report: score_predictions(&preds, corpus, opts)?,
            });
        }
    }
    Ok(rows)
}

/// Tab-separated sweep table, scores ×100 with two decimals.
pub fn render_sweep_tsv(rows: &[SweepRow]) -> String {
    let mut out = String::from("max_ngram\tn_candidates\twP\twR\twF1\tNP_wP\tNP_wR\tNP_wF1\n");
    for r in rows {
        let m = &r.report;
        let _ = writeln!(
            out,
            "{}\t{}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\t{:.2}",
            r.max_ngram,
            r.n_candidates,
            m.wp * 100.0,
            m.wr * 100.0,
            m.wf1 * 100.0,
            m.np_wp * 100.0,
            m.np_wr * 100.0,
            m.np_wf1 * 100.0
        );
    }
    out
}
