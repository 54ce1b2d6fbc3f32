use proptest::prelude::*;
use ttcsw::backends::IdentityTranslator;
use ttcsw::corpus::{corpus_stats, export_corpus, import_corpus, Corpus, Lang, Polarity, Sample, Split, Triplet};
use ttcsw::csw::{build_csw_corpus, strip_tags, tag_sample, validate_tagged, CswConfig};
use ttcsw::metrics::{sim, weighted_scores, MetricsOptions};
use ttcsw::triplet_format::{emit_triplets, parse_triplets};
use ttcsw::tta::{same_multiset, vote, VoteConfig};

const WORDS: &[&str] = &[
    "food", "service", "great", "rude", "the", "sushi", "a,b", "(nice)", "x;y", "ñandú", "ok!", "Über",
];

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(WORDS).prop_map(str::to_string)
}

fn term(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 0..=max).prop_map(|w| w.join(" "))
}

fn polarity() -> impl Strategy<Value = Polarity> {
    prop::sample::select(vec![Polarity::Positive, Polarity::Negative, Polarity::Neutral])
}

fn triplet() -> impl Strategy<Value = Triplet> {
    (term(3), term(3), polarity())
        .prop_filter("at least one term", |(a, o, _)| !a.is_empty() || !o.is_empty())
        .prop_map(|(a, o, p)| Triplet::new(a, o, p).unwrap())
}

fn list(max: usize) -> impl Strategy<Value = Vec<Triplet>> {
    prop::collection::vec(triplet(), 0..=max)
}

fn corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec((prop::collection::vec(word(), 1..8), list(3)), 0..12).prop_map(|rows| {
        let en = Lang::new("en").unwrap();
        let mut c = Corpus::new("prop", en.clone(), Split::Train);
        for (i, (words, gold)) in rows.into_iter().enumerate() {
            c.samples.push(Sample::new(format!("s{i}"), words.join(" "), en.clone(), gold));
        }
        c
    })
}

/// A sample whose terms are contiguous word ranges of its text.
fn locatable_sample() -> impl Strategy<Value = Sample> {
    let vocab = ["good", "food", "staff", "very", "rude", "the", "view", "nice", "room"];
    prop::collection::vec(prop::sample::select(vocab.to_vec()), 2..10)
        .prop_flat_map(|words| {
            let n = words.len();
            let span = (0..n).prop_flat_map(move |s| (Just(s), s + 1..=n.min(s + 3)));
            let t = (span.clone(), prop::option::of(span), polarity());
            (Just(words), prop::collection::vec(t, 0..4))
        })
        .prop_map(|(words, ts)| {
            let text = words.join(" ");
            let gold = ts
                .into_iter()
                .map(|((a0, a1), o, p)| {
                    let o = o.map(|(o0, o1)| words[o0..o1].join(" ")).unwrap_or_default();
                    Triplet::new(words[a0..a1].join(" "), o, p).unwrap()
                })
                .collect();
            Sample::new("x", text, Lang::new("en").unwrap(), gold)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn serialization_round_trip(l in list(5)) {
        let (back, diag) = parse_triplets(&emit_triplets(&l));
        prop_assert!(diag.is_clean(), "{:?}", diag);
        prop_assert_eq!(back, l);
    }

    #[test]
    fn parse_is_total(s in "\\PC{0,80}") {
        let _ = parse_triplets(&s);
    }

    #[test]
    fn parse_survives_mangled_markup(parts in prop::collection::vec(
        prop::sample::select(vec!["(", ")", "<split>", "<join>", "POS", "neg", "food", " ", ","]), 0..30)) {
        let _ = parse_triplets(&parts.concat());
    }

    #[test]
    fn sim_is_bounded(a in triplet(), b in triplet()) {
        for ignore in [false, true] {
            let s = sim(&a, &b, ignore);
            prop_assert!((0.0..=1.0).contains(&s), "{}", s);
        }
        prop_assert!(sim(&a, &b, true) >= sim(&a, &b, false));
        prop_assert_eq!(sim(&a, &a, false), 1.0);
    }

    #[test]
    fn metrics_bounded_and_np_dominates(rows in prop::collection::vec((list(4), list(4)), 1..8)) {
        let (p, g): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        let r = weighted_scores(&p, &g, &MetricsOptions::default()).unwrap();
        for v in [r.wp, r.wr, r.wf1, r.np_wp, r.np_wr, r.np_wf1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(r.np_wf1 >= r.wf1 - 1e-12);
        let f = if r.wp + r.wr == 0.0 { 0.0 } else { 2.0 * r.wp * r.wr / (r.wp + r.wr) };
        prop_assert!((r.wf1 - f).abs() < 1e-12);
    }

    #[test]
    fn metrics_ignore_order(rows in prop::collection::vec((list(4), list(4)), 1..8), seed in any::<u64>()) {
        let (p, g): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        let a = weighted_scores(&p, &g, &MetricsOptions::default()).unwrap();
        let mut idx: Vec<usize> = (0..p.len()).collect();
        idx.rotate_left((seed as usize) % p.len());
        let shuffle = |v: &Vec<Triplet>| { let mut v = v.clone(); v.reverse(); v };
        let p2: Vec<_> = idx.iter().map(|&i| shuffle(&p[i])).collect();
        let g2: Vec<_> = idx.iter().map(|&i| shuffle(&g[i])).collect();
        let b = weighted_scores(&p2, &g2, &MetricsOptions::default()).unwrap();
        prop_assert!((a.wp - b.wp).abs() < 1e-12 && (a.wr - b.wr).abs() < 1e-12);
    }

    #[test]
    fn corpus_file_round_trip(c in corpus()) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        export_corpus(&c, &p).unwrap();
        prop_assert_eq!(import_corpus(&p).unwrap(), c);
    }

    #[test]
    fn stats_ignore_sample_order(c in corpus()) {
        let mut r = c.clone();
        r.samples.reverse();
        prop_assert_eq!(corpus_stats(&c), corpus_stats(&r));
    }

    #[test]
    fn tagging_is_well_formed_and_strippable(s in locatable_sample()) {
        let t = tag_sample(&s).unwrap();
        prop_assert!(validate_tagged(t.sentence.text()).is_ok(), "{}", t.sentence.text());
        prop_assert_eq!(strip_tags(t.sentence.text()), s.text.clone());
    }

    #[test]
    fn identity_csw_keeps_gold(samples in prop::collection::vec(locatable_sample(), 1..6), rate in 0.0f64..=1.0) {
        let en = Lang::new("en").unwrap();
        let mut c = Corpus::new("id", en, Split::Train);
        for (i, mut s) in samples.into_iter().enumerate() {
            s.id = format!("s{i}");
            c.samples.push(s);
        }
        let mut cfg = CswConfig::new(Lang::new("es").unwrap());
        cfg.switch_rate = rate;
        let b = build_csw_corpus(&c, &IdentityTranslator, &cfg).unwrap();
        for out in [&b.ct, &b.csw] {
            let kept: Vec<_> = c.samples.iter().filter(|s| out.samples.iter().any(|o| o.id == s.id)).collect();
            prop_assert_eq!(kept.len(), out.samples.len());
            for (a, o) in kept.iter().zip(&out.samples) {
                prop_assert_eq!(&a.gold, &o.gold);
                prop_assert_eq!(&a.text, &o.text);
            }
        }
    }

    #[test]
    fn vote_is_permutation_invariant(lists in prop::collection::vec(list(3), 1..6), k in 0usize..6) {
        let cfg = VoteConfig::default();
        let a = vote(&lists, &cfg);
        let mut rot = lists.clone();
        let n = rot.len();
        rot.rotate_left(k % n);
        prop_assert!(same_multiset(&a, &vote(&rot, &cfg)));
    }

    #[test]
    fn vote_is_monotone_in_support(lists in prop::collection::vec(list(3), 1..6), lo in 0.0f64..=1.0, hi in 0.0f64..=1.0) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let base = VoteConfig::default();
        let loose = vote(&lists, &VoteConfig { min_support_fraction: lo, ..base });
        let tight = vote(&lists, &VoteConfig { min_support_fraction: hi, ..base });
        for t in &tight {
            prop_assert!(loose.contains(t));
        }
        prop_assert!(tight.len() <= loose.len());
    }

    #[test]
    fn vote_never_invents_polarity(lists in prop::collection::vec(list(3), 1..6)) {
        for t in vote(&lists, &VoteConfig::default()) {
            prop_assert!(lists.iter().flatten().any(|u| u.polarity == t.polarity));
            prop_assert!(lists.iter().flatten().any(|u| *u == t));
        }
    }
}
