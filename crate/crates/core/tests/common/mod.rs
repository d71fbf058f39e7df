#![allow(dead_code)]

use std::collections::HashMap;

use num::{BigInt, BigRational, ToPrimitive, Zero};
use rand::Rng;

use lifelong_sentiment::{ClassLabel, Document, DomainCorpus};

/// Small training set plus one query document.
#[derive(Clone, Debug)]
pub struct Instance {
    pub docs: Vec<Document>,
    pub labels: Vec<ClassLabel>,
    pub query: Document,
}

fn word(i: usize) -> String {
    format!("w{i}")
}

/// Up to `max_docs` training documents over at most `max_vocab` words, both
/// classes present. The query may contain a word never seen in training.
pub fn random_instance<R: Rng>(rng: &mut R, max_docs: usize, max_vocab: usize, max_query: usize) -> Instance {
    let vocab = rng.gen_range(1..=max_vocab);
    let n = rng.gen_range(2..=max_docs);
    let mut labels: Vec<ClassLabel> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                ClassLabel::Positive
            } else {
                ClassLabel::Negative
            }
        })
        .collect();
    labels[0] = ClassLabel::Positive;
    labels[1] = ClassLabel::Negative;
    let docs = (0..n)
        .map(|_| {
            let len = rng.gen_range(0..=8);
            let toks: Vec<String> = (0..len).map(|_| word(rng.gen_range(0..vocab))).collect();
            Document::new(toks.join(" "))
        })
        .collect();
    let qlen = rng.gen_range(0..=max_query);
    let toks: Vec<String> = (0..qlen)
        .map(|_| {
            if rng.gen_bool(0.1) {
                "unseen".to_owned()
            } else {
                word(rng.gen_range(0..vocab))
            }
        })
        .collect();
    Instance {
        docs,
        labels,
        query: Document::new(toks.join(" ")),
    }
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact `P(c) · Π P(w|c)^n` over the query's in-vocabulary tokens with
/// add-one smoothing, straight from the counts.
pub fn exact_joint(inst: &Instance) -> [BigRational; 2] {
    let mut counts: HashMap<&str, [u64; 2]> = HashMap::new();
    let mut totals = [0u64; 2];
    let mut docs = [0u64; 2];
    for (d, l) in inst.docs.iter().zip(&inst.labels) {
        docs[l.index()] += 1;
        for t in d.tokens() {
            counts.entry(t.as_str()).or_insert([0; 2])[l.index()] += 1;
            totals[l.index()] += 1;
        }
    }
    let v = counts.len() as u64;
    let n_docs = docs[0] + docs[1];
    let mut out = [ratio(docs[0], n_docs), ratio(docs[1], n_docs)];
    for t in inst.query.tokens() {
        let Some(c) = counts.get(t.as_str()) else { continue };
        for k in 0..2 {
            out[k] = &out[k] * ratio(1 + c[k], v + totals[k]);
        }
    }
    out
}

pub fn exact_posterior(inst: &Instance) -> [f64; 2] {
    let [p, n] = exact_joint(inst);
    let z = &p + &n;
    assert!(!z.is_zero());
    [(p / &z).to_f64().unwrap(), (n / z).to_f64().unwrap()]
}

/// Positive unless the negative joint is strictly larger.
pub fn exact_decision(inst: &Instance) -> ClassLabel {
    let [p, n] = exact_joint(inst);
    if p >= n {
        ClassLabel::Positive
    } else {
        ClassLabel::Negative
    }
}

/// The two-document corpus used by the hand-computed fixtures.
pub fn tiny_corpus() -> DomainCorpus {
    DomainCorpus::labeled(
        "tiny",
        vec![
            (ClassLabel::Positive, "good good movie"),
            (ClassLabel::Negative, "bad movie"),
        ],
    )
    .unwrap()
}

pub fn write_file(dir: &std::path::Path, name: &str, content: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}
