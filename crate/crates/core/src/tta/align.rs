use std::collections::BTreeMap;

use super::candidates::{AlignedPhrase, AugmentKind, AugmentedInput};
use crate::backends::{alignment_input, generate_batched, is_none_label, BackendError, Generator, Task};
use crate::corpus::{TermKind, Triplet};
use crate::text::{find_ci, normalize_ws};

/// Candidate triplets from one input, with terms moved into the target
/// language where possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    /// `None` for the unmodified target-language input.
    pub kind: Option<AugmentKind>,
    pub triplets: Vec<Triplet>,
    /// Per triplet: whether the aspect / opinion could not be aligned and
    /// was kept as predicted.
    pub unalignable: Vec<[bool; 2]>,
}

impl CandidateSet {
    pub fn n_unalignable(&self) -> usize {
        self.unalignable.iter().flatten().filter(|f| **f).count()
    }
}

enum Plan {
    Keep,
    Map(String),
    Query,
}

fn same(a: &str, b: &str) -> bool {
    normalize_ws(a).to_lowercase() == normalize_ws(b).to_lowercase()
}

/// Known source → target pairs from the selected phrases.
fn known_pairs(s_tgt: &str, phrases: &[AlignedPhrase]) -> Vec<(String, String)> {
    phrases
        .iter()
        .map(|p| {
            let (src, _) = p.src_part();
            let (tgt, span) = p.tgt_part();
            let tgt = span.map(|r| s_tgt[r].to_string()).unwrap_or_else(|| tgt.to_string());
            (src.to_string(), tgt)
        })
        .collect()
}

fn plan(term: &str, input: Option<&AugmentedInput>, s_tgt: &str, known: &[(String, String)]) -> Plan {
    let Some(input) = input else {
        return Plan::Keep;
    };
    if term.is_empty() {
        return Plan::Keep;
    }
    if same(term, &input.inserted) {
        return match input.kind {
            AugmentKind::TgtWithSrcPhrase => Plan::Map(input.replaced.clone()),
            AugmentKind::SrcWithTgtPhrase => Plan::Keep,
        };
    }
    if find_ci(s_tgt, term).is_some() {
        return Plan::Keep;
    }
    if let Some((_, tgt)) = known.iter().find(|(src, _)| same(term, src)) {
        return Plan::Map(tgt.clone());
    }
    Plan::Query
}

/// Align the candidates of several inputs at once; aligner queries are
/// deduplicated and sent in one batched call. For every term, in order:
/// the substituted phrase maps back to what it replaced, text already in
/// `s_tgt` stays, a known phrase pair maps directly, and anything else is
/// asked as `s_tgt <SEP> term`. An aligner `None` keeps the term and
/// flags it. Candidates of the unmodified input are left as they are.
pub fn align_candidate_sets<G: Generator + ?Sized>(
    raw: Vec<(Option<&AugmentedInput>, Vec<Triplet>)>,
    s_tgt: &str,
    phrases: &[AlignedPhrase],
    aligner: &G,
    batch_size: usize,
) -> Result<Vec<CandidateSet>, BackendError> {
    let known = known_pairs(s_tgt, phrases);
    let mut plans: Vec<Vec<[Plan; 2]>> = Vec::with_capacity(raw.len());
    let mut queries: BTreeMap<String, Option<String>> = BTreeMap::new();
    for (input, triplets) in &raw {
        let mut list = Vec::with_capacity(triplets.len());
        for t in triplets {
            let pa = plan(&t.aspect, *input, s_tgt, &known);
            let po = plan(&t.opinion, *input, s_tgt, &known);
            for (p, term) in [(&pa, &t.aspect), (&po, &t.opinion)] {
                if matches!(p, Plan::Query) {
                    queries.entry(term.clone()).or_insert(None);
                }
            }
            list.push([pa, po]);
        }
        plans.push(list);
    }

    if !queries.is_empty() {
        let terms: Vec<String> = queries.keys().cloned().collect();
        let inputs: Vec<String> = terms.iter().map(|t| alignment_input(s_tgt, t)).collect();
        let outputs = generate_batched(aligner, &inputs, Task::Align, None, batch_size)?;
        for (t, o) in terms.into_iter().zip(outputs) {
            if !is_none_label(&o) {
                queries.insert(t, Some(o.trim().to_string()));
            }
        }
    }

    let mut out = Vec::with_capacity(raw.len());
    for ((input, triplets), plan) in raw.into_iter().zip(plans) {
        let mut set = CandidateSet {
            kind: input.map(|i| i.kind),
            triplets: Vec::with_capacity(triplets.len()),
            unalignable: Vec::with_capacity(triplets.len()),
        };
        for (t, p) in triplets.into_iter().zip(plan) {
            let mut flags = [false; 2];
            let mut terms = [t.aspect.clone(), t.opinion.clone()];
            for (slot, kind) in [TermKind::Aspect, TermKind::Opinion].into_iter().enumerate() {
                match &p[slot] {
                    Plan::Keep => {}
                    Plan::Map(s) => terms[slot] = s.clone(),
                    Plan::Query => match queries.get(t.term(kind)).and_then(|o| o.as_ref()) {
                        Some(s) => terms[slot] = s.clone(),
                        None => flags[slot] = true,
                    },
                }
            }
            let [a, o] = terms;
            set.triplets.push(Triplet::new(a, o, t.polarity).unwrap_or(t));
            set.unalignable.push(flags);
        }
        out.push(set);
    }
    Ok(out)
}

/// Single-input form of [`align_candidate_sets`].
pub fn align_candidates<G: Generator + ?Sized>(
    raw_triplets: Vec<Triplet>,
    input: Option<&AugmentedInput>,
    s_tgt: &str,
    phrases: &[AlignedPhrase],
    aligner: &G,
) -> Result<CandidateSet, BackendError> {
    let mut v = align_candidate_sets(vec![(input, raw_triplets)], s_tgt, phrases, aligner, crate::backends::DEFAULT_MAX_BATCH)?;
    Ok(v.pop().expect("one set per input"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{BackendResponse, GenerationRequest};
    use crate::corpus::Polarity;
    use crate::tta::candidates::Side;
    use std::sync::atomic::{AtomicUsize, Ordering};

    const TGT: &str = "Recomiendo el sushi con cinta transportadora";

    struct Counting(AtomicUsize, Option<&'static str>);
    impl Generator for Counting {
        fn backend_id(&self) -> String {
            "c".into()
        }
        fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse, BackendError> {
            self.0.fetch_add(req.inputs.len(), Ordering::SeqCst);
            Ok(BackendResponse {
                outputs: req.inputs.iter().map(|_| self.1.unwrap_or("None").to_string()).collect(),
                latency: Default::default(),
                backend_id: "c".into(),
            })
        }
    }

    fn phrase() -> AlignedPhrase {
        AlignedPhrase {
            phrase: "conveyor belt sushi".into(),
            source_side: Side::Src,
            aligned_text: "el sushi con cinta transportadora".into(),
            aligned_span: Some(11..TGT.len()),
            phrase_span: 16..35,
            length_tokens: 3,
        }
    }

    fn input(kind: AugmentKind) -> AugmentedInput {
        let p = phrase();
        match kind {
            AugmentKind::TgtWithSrcPhrase => AugmentedInput {
                sentence: "Recomiendo conveyor belt sushi".into(),
                kind,
                inserted: "conveyor belt sushi".into(),
                replaced: "el sushi con cinta transportadora".into(),
                phrase: p,
            },
            AugmentKind::SrcWithTgtPhrase => AugmentedInput {
                sentence: "I recommend the el sushi con cinta transportadora".into(),
                kind,
                inserted: "el sushi con cinta transportadora".into(),
                replaced: "conveyor belt sushi".into(),
                phrase: p,
            },
        }
    }

    fn t(a: &str, o: &str) -> Triplet {
        Triplet::new(a, o, Polarity::Positive).unwrap()
    }

    #[test]
    fn substituted_phrase_maps_back_without_queries() {
        let g = Counting(AtomicUsize::new(0), None);
        let i = input(AugmentKind::TgtWithSrcPhrase);
        let set = align_candidates(vec![t("conveyor belt sushi", "Recomiendo")], Some(&i), TGT, &[phrase()], &g).unwrap();
        assert_eq!(set.triplets[0], t("el sushi con cinta transportadora", "Recomiendo"));
        assert_eq!(g.0.load(Ordering::SeqCst), 0);
        assert_eq!(set.n_unalignable(), 0);
    }

    #[test]
    fn only_foreign_terms_are_queried() {
        let g = Counting(AtomicUsize::new(0), Some("recomendable"));
        let i = input(AugmentKind::SrcWithTgtPhrase);
        let set = align_candidates(vec![t("el sushi con cinta transportadora", "recommend")], Some(&i), TGT, &[phrase()], &g)
            .unwrap();
        assert_eq!(g.0.load(Ordering::SeqCst), 1);
        assert_eq!(set.triplets[0].opinion, "recomendable");
    }

    #[test]
    fn none_keeps_term_and_flags() {
        let g = Counting(AtomicUsize::new(0), None);
        let i = input(AugmentKind::SrcWithTgtPhrase);
        let set = align_candidates(vec![t("el sushi", "tasty")], Some(&i), TGT, &[phrase()], &g).unwrap();
        assert_eq!(set.triplets[0], t("el sushi", "tasty"));
        assert_eq!(set.unalignable[0], [false, true]);
    }

    #[test]
    fn plain_input_is_untouched() {
        let g = Counting(AtomicUsize::new(0), Some("x"));
        let set = align_candidates(vec![t("anything", "at all")], None, TGT, &[], &g).unwrap();
        assert_eq!(set.triplets[0], t("anything", "at all"));
        assert_eq!(g.0.load(Ordering::SeqCst), 0);
    }
}
