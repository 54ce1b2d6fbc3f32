use serde::{Deserialize, Serialize};

use super::align::align_candidate_sets;
use super::candidates::{build_augmented_inputs, select_candidates};
use super::vote::vote;
use super::TtaConfig;
use crate::backends::{generate_batched, translate_batched, BackendError, Generator, Task, Translator};
use crate::corpus::{Lang, Triplet};
use crate::error::{Error, Result};
use crate::triplet_format::parse_triplets;

/// The three services a TTA run talks to.
#[derive(Clone, Copy)]
pub struct TtaBackends<'a> {
    pub translator: &'a dyn Translator,
    pub aligner: &'a dyn Generator,
    pub generator: &'a dyn Generator,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TtaDiagnostics {
    pub n_augmented: usize,
    pub n_unalignable: usize,
    pub fell_back: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtaPrediction {
    pub triplets: Vec<Triplet>,
    /// The prediction on the unmodified input.
    pub plain: Vec<Triplet>,
    pub diagnostics: TtaDiagnostics,
    pub notes: Vec<String>,
}

fn augmented(
    text: &str,
    plain: &[Triplet],
    source_lang: &Lang,
    target_lang: &Lang,
    b: &TtaBackends<'_>,
    cfg: &TtaConfig,
) -> std::result::Result<(Vec<Triplet>, TtaDiagnostics, Vec<String>), BackendError> {
    let s_src = translate_batched(b.translator, &[text.to_string()], target_lang, source_lang, false, 1)?
        .pop()
        .unwrap_or_default();
    let phrases = select_candidates(text, &s_src, b.aligner, cfg)?;
    let (aug, notes) = build_augmented_inputs(text, &s_src, &phrases, cfg.n_candidates);
    let inputs: Vec<String> = aug.iter().map(|a| a.sentence.clone()).collect();
    let outputs = generate_batched(b.generator, &inputs, Task::Aste, Some(target_lang), cfg.batch_size)?;

    let mut raw = Vec::with_capacity(aug.len() + 1);
    raw.push((None, plain.to_vec()));
    for (a, o) in aug.iter().zip(&outputs) {
        raw.push((Some(a), parse_triplets(o).0));
    }
    let sets = align_candidate_sets(raw, text, &phrases, b.aligner, cfg.batch_size)?;
    let diag = TtaDiagnostics {
        n_augmented: aug.len(),
        n_unalignable: sets.iter().map(|s| s.n_unalignable()).sum(),
        fell_back: false,
    };
    let lists: Vec<Vec<Triplet>> = sets.into_iter().map(|s| s.triplets).collect();
    Ok((vote(&lists, &cfg.vote_config()), diag, notes))
}

/// Full test-time augmentation for one target-language sentence:
/// translate it to the source language, pick aligned phrases, predict on
/// the unmodified input and every code-switched variant, align candidate
/// terms back into the target language and vote.
///
/// If a backend fails after the plain prediction succeeded, the plain
/// prediction is returned with `fell_back` set, unless `cfg.strict`.
/// A replay-cache miss is always an error.
pub fn tta_predict(
    text: &str,
    source_lang: &Lang,
    target_lang: &Lang,
    backends: &TtaBackends<'_>,
    cfg: &TtaConfig,
) -> Result<TtaPrediction> {
    let out = generate_batched(backends.generator, &[text.to_string()], Task::Aste, Some(target_lang), 1)?;
    let plain = parse_triplets(&out[0]).0;
    match augmented(text, &plain, source_lang, target_lang, backends, cfg) {
        Ok((triplets, diagnostics, notes)) => Ok(TtaPrediction {
            triplets,
            plain,
            diagnostics,
            notes,
        }),
        Err(e) if cfg.strict || matches!(e, BackendError::CacheMiss { .. }) => Err(Error::Backend(e)),
        Err(e) => {
            log::warn!("augmentation failed, using the plain prediction: {e}");
            Ok(TtaPrediction {
                triplets: plain.clone(),
                plain,
                diagnostics: TtaDiagnostics {
                    fell_back: true,
                    ..Default::default()
                },
                notes: vec![e.to_string()],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{alignment_input, BackendResponse, FixtureGenerator, FixtureTranslator, TranslationRequest};
    use crate::corpus::Polarity;

    const TGT: &str = "Recomiendo el sushi con cinta transportadora";
    const SRC: &str = "I recommend the conveyor belt sushi";

    fn langs() -> (Lang, Lang) {
        (Lang::new("en").unwrap(), Lang::new("es").unwrap())
    }

    fn translator() -> FixtureTranslator {
        let (en, es) = langs();
        let mut t = FixtureTranslator::new("t");
        t.insert(&es, &en, TGT, SRC);
        t
    }

    fn gold() -> &'static str {
        "(el sushi con cinta transportadora<split>Recomiendo<split>POS)"
    }

    #[test]
    fn conveyor_belt_sushi_end_to_end() {
        let (en, es) = langs();
        let mut aligner = FixtureGenerator::new("al");
        aligner.insert_alignment(TGT, "conveyor belt sushi", "el sushi con cinta transportadora");
        aligner.insert_alignment(TGT, "recommend", "Recomiendo");
        let mut gen = FixtureGenerator::new("gen");
        gen.insert(Task::Aste, TGT, gold());
        gen.insert(Task::Aste, "Recomiendo conveyor belt sushi", "(conveyor belt sushi<split>Recomiendo<split>POS)");
        gen.insert(
            Task::Aste,
            "I recommend the el sushi con cinta transportadora",
            "(el sushi con cinta transportadora<split>recommend<split>POS)",
        );
        let tr = translator();
        let b = TtaBackends {
            translator: &tr,
            aligner: &aligner,
            generator: &gen,
        };
        let p = tta_predict(TGT, &en, &es, &b, &TtaConfig::default()).unwrap();
        let want = Triplet::new("el sushi con cinta transportadora", "Recomiendo", Polarity::Positive).unwrap();
        assert_eq!(p.triplets, vec![want]);
        assert!(p.diagnostics.n_augmented >= 2);
        assert!(!p.diagnostics.fell_back);
        assert_eq!(alignment_input("a", "b"), "a <SEP> b");
    }

    struct Broken;
    impl Translator for Broken {
        fn backend_id(&self) -> String {
            "broken".into()
        }
        fn translate(&self, _: &TranslationRequest) -> std::result::Result<BackendResponse, BackendError> {
            Err(BackendError::Transport {
                attempts: 3,
                message: "down".into(),
            })
        }
    }

    #[test]
    fn backend_failure_falls_back_unless_strict() {
        let (en, es) = langs();
        let mut gen = FixtureGenerator::new("gen");
        gen.insert(Task::Aste, TGT, gold());
        let al = FixtureGenerator::new("al");
        let b = TtaBackends {
            translator: &Broken,
            aligner: &al,
            generator: &gen,
        };
        let p = tta_predict(TGT, &en, &es, &b, &TtaConfig::default()).unwrap();
        assert!(p.diagnostics.fell_back);
        assert_eq!(p.triplets, p.plain);
        let strict = TtaConfig {
            strict: true,
            ..Default::default()
        };
        assert!(tta_predict(TGT, &en, &es, &b, &strict).is_err());
    }
}
