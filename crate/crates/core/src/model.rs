//! Multinomial naive Bayes with additive (Laplace) smoothing.
//!
//! Word likelihoods are `(λ + N(c,w)) / (λ|V| + Σ_v N(c,v))`. Document
//! scores are accumulated in log space; the literal product of likelihoods
//! underflows on review-length documents.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::corpus::{ClassLabel, Document, DomainCorpus};
use crate::error::{Error, Result};
use crate::{fmt_exact, WordSet};

/// Relative tolerance under which two class scores are treated as tied.
///
/// Equal products summed in a different order can differ in the last bit;
/// such ties still resolve to positive.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct NbModel {
    lambda: f64,
    doc_counts: [u64; 2],
    /// word -> per-class occurrence count
    counts: HashMap<String, [u64; 2]>,
    class_totals: [u64; 2],
}

/// Per-class posterior probabilities, indexed by [`ClassLabel::index`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Posterior(pub [f64; 2]);

impl Posterior {
    pub fn get(&self, class: ClassLabel) -> f64 {
        self.0[class.index()]
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} outside [0, 1]")));
    }
    Ok(())
}

impl NbModel {
    /// Fits on parallel document and label slices. Both classes must be present.
    pub fn fit(documents: &[Document], labels: &[ClassLabel], lambda: f64) -> Result<Self> {
        let model = Self::fit_allowing_empty_class(documents, labels, lambda)?;
        for class in ClassLabel::ALL {
            if model.doc_counts[class.index()] == 0 {
                return Err(Error::MissingClass { class, domain: None });
            }
        }
        Ok(model)
    }

    /// Like [`NbModel::fit`] but accepts a class with no documents; that
    /// class then has prior zero.
    pub fn fit_allowing_empty_class(documents: &[Document], labels: &[ClassLabel], lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if documents.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: documents.len(),
                right: labels.len(),
            });
        }
        if documents.is_empty() {
            return Err(Error::InvalidArgument("cannot fit on zero documents".into()));
        }
        let mut model = NbModel {
            lambda,
            doc_counts: [0; 2],
            counts: HashMap::new(),
            class_totals: [0; 2],
        };
        for (doc, &label) in documents.iter().zip(labels) {
            let c = label.index();
            model.doc_counts[c] += 1;
            for tok in doc.tokens() {
                model.counts.entry(tok.clone()).or_insert([0; 2])[c] += 1;
                model.class_totals[c] += 1;
            }
        }
        Ok(model)
    }

    /// Fits on a labeled corpus; a missing class is reported with the domain name.
    pub fn fit_corpus(corpus: &DomainCorpus, lambda: f64) -> Result<Self> {
        let labels = corpus.require_labels()?;
        Self::fit(corpus.documents(), labels, lambda).map_err(|e| match e {
            Error::MissingClass { class, .. } => Error::MissingClass {
                class,
                domain: Some(corpus.name().to_owned()),
            },
            e => e,
        })
    }

    /// Adds another model's counts into this one. The result equals a fit on
    /// the pooled training documents.
    pub fn absorb(&mut self, other: &NbModel) {
        for c in 0..2 {
            self.doc_counts[c] += other.doc_counts[c];
            self.class_totals[c] += other.class_totals[c];
        }
        for (w, n) in &other.counts {
            let e = self.counts.entry(w.clone()).or_insert([0; 2]);
            e[0] += n[0];
            e[1] += n[1];
        }
    }

    pub fn merged(&self, other: &NbModel) -> NbModel {
        let mut m = self.clone();
        m.absorb(other);
        m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.len()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn vocabulary_set(&self) -> WordSet {
        self.counts.keys().cloned().collect()
    }

    pub fn doc_count(&self, class: ClassLabel) -> u64 {
        self.doc_counts[class.index()]
    }

    pub fn prior(&self, class: ClassLabel) -> f64 {
        let total = self.doc_counts[0] + self.doc_counts[1];
        self.doc_counts[class.index()] as f64 / total as f64
    }

    pub fn priors(&self) -> [f64; 2] {
        [self.prior(ClassLabel::Positive), self.prior(ClassLabel::Negative)]
    }

    pub fn word_count(&self, word: &str, class: ClassLabel) -> u64 {
        self.counts.get(word).map_or(0, |n| n[class.index()])
    }

    pub fn class_total(&self, class: ClassLabel) -> u64 {
        self.class_totals[class.index()]
    }

    /// Total occurrences of every vocabulary word, both classes combined.
    pub fn term_counts(&self) -> HashMap<String, u64> {
        self.counts.iter().map(|(w, n)| (w.clone(), n[0] + n[1])).collect()
    }

    /// Smoothed `P(w|c)`. Words outside the vocabulary get a zero count
    /// against the same `|V|`.
    pub fn word_likelihood(&self, word: &str, class: ClassLabel) -> f64 {
        let n = self.word_count(word, class) as f64;
        self.likelihood_from_count(n, class)
    }

    fn likelihood_from_count(&self, n: f64, class: ClassLabel) -> f64 {
        let denom = self.lambda * self.counts.len() as f64 + self.class_totals[class.index()] as f64;
        if denom == 0.0 {
            return 0.0;
        }
        (self.lambda + n) / denom
    }

    /// Unnormalised log scores `log P(c) + Σ n_w log P(w|c)` over the tokens
    /// that are in the vocabulary and, when given, in `active`.
    pub fn log_scores(&self, doc: &Document, active: Option<&HashSet<String>>) -> [f64; 2] {
        let mut freq: BTreeMap<&str, u32> = BTreeMap::new();
        for tok in doc.tokens() {
            *freq.entry(tok.as_str()).or_insert(0) += 1;
        }
        let priors = self.priors();
        let mut scores = [priors[0].ln(), priors[1].ln()];
        for (w, n) in freq {
            let Some(counts) = self.counts.get(w) else { continue };
            if active.is_some_and(|a| !a.contains(w)) {
                continue;
            }
            for class in ClassLabel::ALL {
                let c = class.index();
                let p = self.likelihood_from_count(counts[c] as f64, class);
                scores[c] += n as f64 * p.ln();
            }
        }
        scores
    }

    /// `P(c|d)` normalised with log-sum-exp. A document with no usable
    /// tokens yields the priors.
    pub fn posterior(&self, doc: &Document, active: Option<&HashSet<String>>) -> Posterior {
        let s = self.log_scores(doc, active);
        let m = s[0].max(s[1]);
        if m == f64::NEG_INFINITY || m.is_nan() {
            return Posterior(self.priors());
        }
        let e = [(s[0] - m).exp(), (s[1] - m).exp()];
        let z = e[0] + e[1];
        Posterior([e[0] / z, e[1] / z])
    }

    /// Positive iff the positive log score is not below the negative one.
    pub fn decide(&self, doc: &Document, active: Option<&HashSet<String>>) -> ClassLabel {
        let [sp, sn] = self.log_scores(doc, active);
        decide_scores(sp, sn)
    }

    pub fn predict_all(&self, docs: &[Document], active: Option<&HashSet<String>>) -> Vec<ClassLabel> {
        docs.iter().map(|d| self.decide(d, active)).collect()
    }

    /// Writes the line-oriented snapshot format.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "nbmodel {SNAPSHOT_VERSION}")?;
        writeln!(w, "lambda {}", fmt_exact(self.lambda))?;
        for class in ClassLabel::ALL {
            writeln!(w, "docs {} {}", class, self.doc_count(class))?;
        }
        for class in ClassLabel::ALL {
            writeln!(w, "prior {} {}", class, fmt_exact(self.prior(class)))?;
        }
        let mut words: Vec<&String> = self.counts.keys().collect();
        words.sort_unstable();
        for class in ClassLabel::ALL {
            for word in &words {
                let n = self.counts[*word][class.index()];
                if n > 0 {
                    writeln!(w, "count {class} {word} {n}")?;
                }
            }
        }
        Ok(())
    }

    pub fn to_snapshot_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_snapshot(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("snapshot is UTF-8")
    }

    /// Reads a snapshot written by [`NbModel::write_snapshot`].
    pub fn read_snapshot<R: BufRead>(r: R, origin: &str) -> Result<Self> {
        let mut lambda = None;
        let mut doc_counts = [None, None];
        let mut priors = [None, None];
        let mut counts: HashMap<String, [u64; 2]> = HashMap::new();
        let mut class_totals = [0u64; 2];
        let mut saw_header = false;

        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let bad = |msg: &str| Error::parse(origin, lineno, msg);
            let class_of = |s: &str| s.parse::<ClassLabel>().map_err(|e| Error::parse(origin, lineno, e));
            if !saw_header {
                if fields.len() != 2 || fields[0] != "nbmodel" {
                    return Err(bad("missing nbmodel header"));
                }
                if fields[1] != SNAPSHOT_VERSION.to_string() {
                    return Err(Error::VersionMismatch(origin.to_owned()));
                }
                saw_header = true;
                continue;
            }
            match fields.as_slice() {
                ["lambda", v] => lambda = Some(v.parse::<f64>().map_err(|_| bad("bad lambda"))?),
                ["docs", c, v] => {
                    doc_counts[class_of(c)?.index()] = Some(v.parse::<u64>().map_err(|_| bad("bad doc count"))?)
                }
                ["prior", c, v] => priors[class_of(c)?.index()] = Some(v.parse::<f64>().map_err(|_| bad("bad prior"))?),
                ["count", c, word, v] => {
                    let c = class_of(c)?.index();
                    let n = v.parse::<u64>().map_err(|_| bad("bad count"))?;
                    let e = counts.entry((*word).to_owned()).or_insert([0; 2]);
                    if e[c] != 0 {
                        return Err(bad("duplicate count line"));
                    }
                    e[c] = n;
                    class_totals[c] += n;
                }
                _ => return Err(bad("unrecognised line")),
            }
        }
        let missing = |what: &str| Error::parse(origin, 0, format!("snapshot truncated: missing {what}"));
        if !saw_header {
            return Err(missing("header"));
        }
        let lambda = lambda.ok_or_else(|| missing("lambda"))?;
        check_lambda(lambda)?;
        let doc_counts = [
            doc_counts[0].ok_or_else(|| missing("docs pos"))?,
            doc_counts[1].ok_or_else(|| missing("docs neg"))?,
        ];
        let model = NbModel {
            lambda,
            doc_counts,
            counts,
            class_totals,
        };
        for class in ClassLabel::ALL {
            let stored = priors[class.index()].ok_or_else(|| missing("prior"))?;
            if stored.to_bits() != model.prior(class).to_bits() {
                return Err(Error::parse(origin, 0, "prior does not match document counts"));
            }
        }
        Ok(model)
    }
}

pub(crate) fn decide_scores(sp: f64, sn: f64) -> ClassLabel {
    if sp == sn {
        return ClassLabel::Positive;
    }
    if !sp.is_finite() || !sn.is_finite() {
        return if sp > sn {
            ClassLabel::Positive
        } else {
            ClassLabel::Negative
        };
    }
    let scale = sp.abs().max(sn.abs()).max(1.0);
    if sp - sn >= -TIE_TOLERANCE * scale {
        ClassLabel::Positive
    } else {
        ClassLabel::Negative
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::*;

    fn docs(texts: &[&str]) -> Vec<Document> {
        texts.iter().map(|t| Document::new(*t)).collect()
    }

    fn example() -> NbModel {
        NbModel::fit(&docs(&["good good movie", "bad movie"]), &[Positive, Negative], 1.0).unwrap()
    }

    #[test]
    fn fit_counts() {
        let m = example();
        assert_eq!(m.vocabulary_size(), 3);
        assert_eq!(m.word_count("good", Positive), 2);
        assert_eq!(m.class_total(Positive), 3);
        assert_eq!(m.class_total(Negative), 2);
        assert_eq!(m.priors(), [0.5, 0.5]);
    }

    #[test]
    fn likelihood_examples() {
        let m = example();
        assert_eq!(m.word_likelihood("good", Positive), 0.5);
        assert!((m.word_likelihood("bad", Positive) - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.word_likelihood("good", Negative) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn uniform_when_class_has_no_tokens() {
        let m = NbModel::fit(&docs(&["a b c d", ""]), &[Positive, Negative], 1.0).unwrap();
        for w in ["a", "b", "c", "d"] {
            assert_eq!(m.word_likelihood(w, Negative), 0.25);
        }
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            NbModel::fit(&docs(&["a", "b"]), &[Positive, Positive], 1.0),
            Err(Error::MissingClass { class: Negative, .. })
        ));
        assert!(matches!(
            NbModel::fit(&docs(&["a", "b"]), &[Positive], 1.0),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(NbModel::fit(&docs(&["a", "b"]), &[Positive, Negative], 1.5).is_err());
    }

    #[test]
    fn lambda_zero_unseen_word_likelihood_is_zero() {
        let m = NbModel::fit(&docs(&["good", "bad"]), &[Positive, Negative], 0.0).unwrap();
        assert_eq!(m.word_likelihood("bad", Positive), 0.0);
        assert_eq!(m.word_likelihood("good", Positive), 1.0);
        // positive side is log(0) = -inf for "bad"
        assert_eq!(m.decide(&Document::new("bad"), None), Negative);
    }

    #[test]
    fn posterior_example() {
        let p = example().posterior(&Document::new("good"), None);
        assert!((p.get(Positive) - 0.25 / (0.25 + 0.5 * 0.2)).abs() < 1e-12);
        assert!((p.get(Positive) - 0.714_285_714_285_714_3).abs() < 1e-12);
    }

    #[test]
    fn unknown_tokens_give_priors() {
        let m = NbModel::fit(&docs(&["a", "b", "c"]), &[Positive, Positive, Negative], 1.0).unwrap();
        let p = m.posterior(&Document::new("zzz yyy"), None);
        assert_eq!(p.0, m.priors());
        let p = m.posterior(&Document::new(""), None);
        assert_eq!(p.0, m.priors());
    }

    #[test]
    fn decide_examples() {
        let m = example();
        assert_eq!(m.decide(&Document::new("good movie"), None), Positive);
        assert_eq!(m.decide(&Document::new("bad"), None), Negative);
    }

    #[test]
    fn symmetric_model_ties_positive() {
        let m = NbModel::fit(&docs(&["x y", "x y"]), &[Positive, Negative], 1.0).unwrap();
        for t in ["x", "y y x", "", "unknown"] {
            let d = Document::new(t);
            assert_eq!(m.decide(&d, None), Positive);
            let p = m.posterior(&d, None);
            assert!((p.0[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn active_vocab_gates_tokens() {
        let m = example();
        let d = Document::new("good bad bad");
        let only_good: WordSet = ["good".to_string()].into_iter().collect();
        assert_eq!(m.decide(&d, None), Negative);
        assert_eq!(m.decide(&d, Some(&only_good)), Positive);
        assert_eq!(m.posterior(&d, Some(&m.vocabulary_set())), m.posterior(&d, None));
    }

    #[test]
    fn absorb_matches_pooled_fit() {
        let a = docs(&["good good movie", "bad movie", "fine"]);
        let la = [Positive, Negative, Positive];
        let b = docs(&["awful plot", "great plot great"]);
        let lb = [Negative, Positive];
        let merged = NbModel::fit(&a, &la, 1.0)
            .unwrap()
            .merged(&NbModel::fit(&b, &lb, 1.0).unwrap());
        let pooled_docs: Vec<_> = a.iter().chain(&b).cloned().collect();
        let pooled_labels: Vec<_> = la.iter().chain(&lb).copied().collect();
        assert_eq!(merged, NbModel::fit(&pooled_docs, &pooled_labels, 1.0).unwrap());
    }

    #[test]
    fn snapshot_round_trip() {
        let m = NbModel::fit(
            &docs(&["good good movie!", "bad movie 5", "ok"]),
            &[Positive, Negative, Positive],
            1.0,
        )
        .unwrap();
        let text = m.to_snapshot_string();
        assert!(text.starts_with("nbmodel 1\n"));
        assert!(text.contains("prior pos 6.6666666666666663e-1\n"));
        assert!(text.contains("count pos good 2\n"));
        let back = NbModel::read_snapshot(text.as_bytes(), "m").unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_snapshot_string(), text);
    }

    #[test]
    fn snapshot_rejects_bad_input() {
        assert!(matches!(
            NbModel::read_snapshot("nbmodel 9\n".as_bytes(), "m"),
            Err(Error::VersionMismatch(_))
        ));
        let text = example().to_snapshot_string();
        let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(NbModel::read_snapshot(truncated.as_bytes(), "m").is_err());
        let bad = text.replace("count pos good 2", "count pos good two");
        let err = NbModel::read_snapshot(bad.as_bytes(), "m").unwrap_err();
        assert!(matches!(err, Error::Parse { line, .. } if line > 1));
    }
}
