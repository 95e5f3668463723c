//! LSA checked against a brute-force term-space oracle.
//!
//! The oracle recomputes raw tf × ln(N/df) weights from whitespace-split
//! text (every test word is lowercase, at least two letters and not a
//! stopword, so this split agrees with the library tokenizer) and compares
//! documents by plain cosine in the full term space.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use topictrap_core::lsa::{all_pairs, build_matrix, cosine, reduce, ReducedSpace};
use topictrap_core::TermUri;

type Docs = BTreeMap<TermUri, String>;

fn docs(pairs: &[(&str, &str)]) -> Docs {
    pairs.iter().map(|(u, t)| (TermUri::new(*u).unwrap(), t.to_string())).collect()
}

/// Term-space weights per surviving document, keyed by term.
fn oracle_weights(docs: &Docs) -> BTreeMap<String, BTreeMap<String, f64>> {
    let tf: BTreeMap<String, BTreeMap<String, f64>> = docs
        .iter()
        .filter(|(_, text)| text.split_whitespace().next().is_some())
        .map(|(uri, text)| {
            let mut counts = BTreeMap::new();
            for word in text.split_whitespace() {
                *counts.entry(word.to_string()).or_insert(0.0) += 1.0;
            }
            (uri.to_string(), counts)
        })
        .collect();
    let n = tf.len() as f64;
    let mut df: BTreeMap<&str, f64> = BTreeMap::new();
    for counts in tf.values() {
        for word in counts.keys() {
            *df.entry(word).or_insert(0.0) += 1.0;
        }
    }
    let mut out = BTreeMap::new();
    for (uri, counts) in &tf {
        let weights: BTreeMap<String, f64> =
            counts.iter().map(|(w, c)| (w.clone(), c * (n / df[w.as_str()]).ln())).collect();
        if weights.values().any(|x| *x != 0.0) {
            out.insert(uri.clone(), weights);
        }
    }
    out
}

fn oracle_cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let dot: f64 = a.iter().map(|(w, x)| x * b.get(w).copied().unwrap_or(0.0)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn full_rank(docs: &Docs) -> ReducedSpace {
    reduce(&build_matrix(docs, "en").unwrap(), usize::MAX).unwrap()
}

fn geometry_docs() -> Docs {
    docs(&[
        ("circle", "circle radius centre circumference radius"),
        ("disc", "disc circle radius area"),
        ("ellipse", "ellipse focus axis curve cone"),
        ("cone", "cone apex base circle surface"),
        ("chart", "chart sector share data"),
        ("pie", "pie chart sector share slice"),
    ])
}

#[test]
fn weights_match_oracle() {
    let d = geometry_docs();
    let m = build_matrix(&d, "en").unwrap();
    let oracle = oracle_weights(&d);
    for (doc, weights) in &oracle {
        for term in m.terms() {
            let expected = weights.get(term).copied().unwrap_or(0.0);
            assert!((m.weight(term, doc).unwrap() - expected).abs() < 1e-12, "{term} in {doc}");
        }
    }
}

#[test]
fn cosine_is_exactly_symmetric() {
    let space = full_rank(&geometry_docs());
    for a in space.docs() {
        for b in space.docs() {
            let va = space.doc_vector(a.as_str()).unwrap();
            let vb = space.doc_vector(b.as_str()).unwrap();
            assert_eq!(cosine(va, vb).unwrap().to_bits(), cosine(vb, va).unwrap().to_bits());
        }
    }
}

#[test]
fn self_similarity_is_one() {
    let space = full_rank(&geometry_docs());
    for d in space.docs() {
        let v = space.doc_vector(d.as_str()).unwrap();
        assert!((cosine(v, v).unwrap() - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn full_rank_reconstruction() {
    let d = geometry_docs();
    let m = build_matrix(&d, "en").unwrap();
    let space = reduce(&m, usize::MAX).unwrap();
    let oracle = oracle_weights(&d);
    let back = space.reconstruct();
    for (j, doc) in space.docs().iter().enumerate() {
        for (i, term) in m.terms().iter().enumerate() {
            let expected = oracle[doc.as_str()].get(term).copied().unwrap_or(0.0);
            assert!((back[j][i] - expected).abs() <= 1e-8, "{term} in {doc}: {} vs {expected}", back[j][i]);
        }
    }
}

#[test]
fn fold_in_of_a_duplicate_is_parallel() {
    let d = geometry_docs();
    let space = reduce(&build_matrix(&d, "en").unwrap(), 3).unwrap();
    for (uri, text) in &d {
        let stored = space.doc_vector(uri.as_str()).unwrap();
        let folded = space.fold_in(text);
        assert!((cosine(stored, &folded).unwrap() - 1.0).abs() <= 1e-9);
        let doubled = space.fold_in(&format!("{text} {text}"));
        assert!((cosine(stored, &doubled).unwrap() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn all_pairs_matches_term_space_cosine() {
    let d = geometry_docs();
    let oracle = oracle_weights(&d);
    let pairs = all_pairs(&full_rank(&d), 0.0);
    assert_eq!(pairs.len(), oracle.len() * (oracle.len() - 1) / 2);
    for p in &pairs {
        let expected = oracle_cosine(&oracle[p.a.as_str()], &oracle[p.b.as_str()]).max(0.0);
        assert!((p.similarity - expected).abs() <= 1e-6, "{} {}: {} vs {expected}", p.a, p.b, p.similarity);
    }
}

#[test]
fn disjoint_vocabulary_gives_zero() {
    let d = docs(&[
        ("a", "triangle angle vertex side"),
        ("b", "triangle angle vertex hypotenuse"),
        ("c", "fraction numerator denominator"),
    ]);
    let space = full_rank(&d);
    let sim = |x: &str, y: &str| cosine(space.doc_vector(x).unwrap(), space.doc_vector(y).unwrap()).unwrap();
    assert!(sim("a", "b") > 0.0);
    assert!(sim("a", "c").abs() <= 1e-12);
    assert!(sim("a", "b") > sim("a", "c"));
    let pairs = all_pairs(&space, 1e-9);
    assert_eq!(pairs.len(), 1);
    assert_eq!((pairs[0].a.as_str(), pairs[0].b.as_str()), ("a", "b"));
}

const VOCAB: &[&str] =
    &["angle", "circle", "cone", "disc", "ellipse", "focus", "radius", "sector", "chart", "slice", "apex", "curve"];

fn corpus_strategy() -> impl Strategy<Value = Docs> {
    prop::collection::vec(prop::collection::vec(0..VOCAB.len(), 1..8), 2..=10).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, words)| {
                let text: Vec<&str> = words.into_iter().map(|w| VOCAB[w]).collect();
                (TermUri::new(format!("d{i:02}")).unwrap(), text.join(" "))
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_corpora_match_oracle(d in corpus_strategy()) {
        let oracle = oracle_weights(&d);
        prop_assume!(oracle.len() >= 2);
        let space = full_rank(&d);
        let survivors: BTreeSet<&str> = space.docs().iter().map(TermUri::as_str).collect();
        prop_assert_eq!(survivors, oracle.keys().map(String::as_str).collect::<BTreeSet<_>>());
        for p in all_pairs(&space, 0.0) {
            let expected = oracle_cosine(&oracle[p.a.as_str()], &oracle[p.b.as_str()]).max(0.0);
            prop_assert!((p.similarity - expected).abs() <= 1e-6, "{} {}: {} vs {}", p.a, p.b, p.similarity, expected);
        }
        let again = full_rank(&d);
        prop_assert_eq!(space.to_json(), again.to_json());
    }
}
