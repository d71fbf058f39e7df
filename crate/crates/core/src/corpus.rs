//! Domain corpora: one review per line, optionally prefixed by a label.
//!
//! Tokenization is a bare whitespace split. Case, punctuation and numerals
//! are kept exactly as they appear in the input.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "pos")]
    Positive,
    #[serde(rename = "neg")]
    Negative,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 2] = [ClassLabel::Positive, ClassLabel::Negative];

    pub fn index(self) -> usize {
        match self {
            ClassLabel::Positive => 0,
            ClassLabel::Negative => 1,
        }
    }

    pub fn from_index(i: usize) -> ClassLabel {
        if i == 0 {
            ClassLabel::Positive
        } else {
            ClassLabel::Negative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Positive => "pos",
            ClassLabel::Negative => "neg",
        }
    }

    pub fn opposite(self) -> ClassLabel {
        match self {
            ClassLabel::Positive => ClassLabel::Negative,
            ClassLabel::Negative => ClassLabel::Positive,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pos" | "positive" | "+" => Ok(ClassLabel::Positive),
            "neg" | "negative" | "-" => Ok(ClassLabel::Negative),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Splits on runs of whitespace. No other normalisation is applied.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    raw_text: String,
    tokens: Vec<String>,
}

impl Document {
    pub fn new(raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let tokens = tokenize(&raw_text);
        Document { raw_text, tokens }
    }

    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Whether a corpus file carries a `<label>TAB` prefix on every record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelMode {
    Labeled,
    Unlabeled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainCorpus {
    name: String,
    documents: Vec<Document>,
    labels: Option<Vec<ClassLabel>>,
}

impl DomainCorpus {
    pub fn new(name: impl Into<String>, documents: Vec<Document>, labels: Option<Vec<ClassLabel>>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidArgument("domain name must be non-empty".into()));
        }
        if let Some(labels) = &labels {
            if labels.len() != documents.len() {
                return Err(Error::LengthMismatch {
                    left: documents.len(),
                    right: labels.len(),
                });
            }
        }
        Ok(DomainCorpus {
            name,
            documents,
            labels,
        })
    }

    /// Builds a labeled corpus from `(label, text)` pairs.
    pub fn labeled<S: AsRef<str>>(
        name: impl Into<String>,
        records: impl IntoIterator<Item = (ClassLabel, S)>,
    ) -> Result<Self> {
        let (labels, documents): (Vec<_>, Vec<_>) =
            records.into_iter().map(|(l, t)| (l, Document::new(t.as_ref()))).unzip();
        DomainCorpus::new(name, documents, Some(labels))
    }

    pub fn unlabeled<S: AsRef<str>>(name: impl Into<String>, texts: impl IntoIterator<Item = S>) -> Result<Self> {
        let documents = texts.into_iter().map(|t| Document::new(t.as_ref())).collect();
        DomainCorpus::new(name, documents, None)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn labels(&self) -> Option<&[ClassLabel]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Labels, or [`Error::Unlabeled`] when the corpus has none.
    pub fn require_labels(&self) -> Result<&[ClassLabel]> {
        self.labels().ok_or_else(|| Error::Unlabeled(self.name.clone()))
    }

    /// Same documents with the labels dropped.
    pub fn without_labels(&self) -> DomainCorpus {
        DomainCorpus {
            name: self.name.clone(),
            documents: self.documents.clone(),
            labels: None,
        }
    }

    /// Same documents with `labels` attached.
    pub fn with_labels(&self, labels: Vec<ClassLabel>) -> Result<DomainCorpus> {
        DomainCorpus::new(self.name.clone(), self.documents.clone(), Some(labels))
    }

    /// Documents per class, `[positive, negative]`.
    pub fn class_counts(&self) -> Option<[usize; 2]> {
        self.labels().map(|labels| {
            let mut counts = [0; 2];
            for l in labels {
                counts[l.index()] += 1;
            }
            counts
        })
    }

    /// Total occurrences of every token across all documents.
    pub fn term_counts(&self) -> HashMap<String, u64> {
        let mut counts = HashMap::new();
        for doc in &self.documents {
            for tok in doc.tokens() {
                *counts.entry(tok.clone()).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Sub-corpus made of the documents at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> DomainCorpus {
        DomainCorpus {
            name: self.name.clone(),
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|labels| indices.iter().map(|&i| labels[i]).collect()),
        }
    }

    /// Parses corpus text. `origin` is used in error messages.
    pub fn parse(name: &str, origin: &str, content: &str, mode: LabelMode) -> Result<Self> {
        let mut documents = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in content.lines().enumerate() {
            let lineno = i + 1;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                continue;
            }
            match mode {
                LabelMode::Unlabeled => documents.push(Document::new(line)),
                LabelMode::Labeled => {
                    let (label, text) = line
                        .split_once('\t')
                        .ok_or_else(|| Error::parse(origin, lineno, "malformed record, expected <label>TAB<text>"))?;
                    let label = match label {
                        "pos" => ClassLabel::Positive,
                        "neg" => ClassLabel::Negative,
                        other => {
                            return Err(Error::UnknownLabel {
                                origin: origin.to_owned(),
                                line: lineno,
                                token: other.to_owned(),
                            })
                        }
                    };
                    labels.push(label);
                    documents.push(Document::new(text));
                }
            }
        }
        if documents.is_empty() {
            return Err(Error::EmptyFile(origin.to_owned()));
        }
        let labels = (mode == LabelMode::Labeled).then_some(labels);
        DomainCorpus::new(name, documents, labels)
    }

    /// Serializes back to the line format accepted by [`DomainCorpus::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, doc) in self.documents.iter().enumerate() {
            if let Some(labels) = &self.labels {
                out.push_str(labels[i].as_str());
                out.push('\t');
            }
            out.push_str(doc.raw_text());
            out.push('\n');
        }
        out
    }
}

/// Reads one domain file.
pub fn load_domain(path: impl AsRef<Path>, name: &str, mode: LabelMode) -> Result<DomainCorpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DomainCorpus::parse(name, &path.display().to_string(), &content, mode)
}

/// Default domain name for a file: its stem.
pub fn domain_name_for(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Stratified k-fold assignment.
///
/// Each class's indices are shuffled with a seeded ChaCha8 stream and dealt
/// round-robin, the second class continuing where the first one stopped, so
/// fold sizes and per-class counts both differ by at most one. Indices
/// within a fold are sorted.
pub fn split_folds(corpus: &DomainCorpus, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let labels = corpus.require_labels()?;
    if k < 2 || k > labels.len() {
        return Err(Error::InvalidArgument(format!(
            "fold count {k} out of range 2..={}",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in ClassLabel::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Great!! 5 stars"), vec!["Great!!", "5", "stars"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("  a  b "), vec!["a", "b"]);
        assert_eq!(tokenize("tab\tand\nnewline"), vec!["tab", "and", "newline"]);
    }

    #[test]
    fn parse_labeled() {
        let c = DomainCorpus::parse(
            "d",
            "d.tsv",
            "pos\tgreat product\nneg\tbroke fast\n",
            LabelMode::Labeled,
        )
        .unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.labels().unwrap(), &[ClassLabel::Positive, ClassLabel::Negative]);
        assert_eq!(c.documents()[1].tokens(), &["broke", "fast"]);
    }

    #[test]
    fn parse_rejects_unknown_label() {
        let err = DomainCorpus::parse("d", "d.tsv", "pos\tfine\nmaybe\tok\n", LabelMode::Labeled).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { line: 2, .. }));
        assert!(err.to_string().contains("unknown label"));
    }

    #[test]
    fn parse_reports_malformed_line_number() {
        let err = DomainCorpus::parse("d", "d.tsv", "pos\tfine\n\nno tab here\n", LabelMode::Labeled).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn parse_empty_file() {
        assert!(matches!(
            DomainCorpus::parse("d", "d.tsv", "\n  \n", LabelMode::Unlabeled),
            Err(Error::EmptyFile(_))
        ));
    }

    #[test]
    fn empty_text_record_is_kept() {
        let c = DomainCorpus::parse("d", "d.tsv", "pos\t\nneg\tbad\n", LabelMode::Labeled).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.documents()[0].is_empty());
    }

    #[test]
    fn unlabeled_mode_keeps_tabs_in_text() {
        let c = DomainCorpus::parse("d", "d.txt", "pos\tgreat\nplain text\n", LabelMode::Unlabeled).unwrap();
        assert!(c.labels().is_none());
        assert_eq!(c.documents()[0].tokens(), &["pos", "great"]);
    }

    #[test]
    fn to_text_round_trips() {
        let src = "pos\tgreat  product\nneg\tbroke fast\n";
        let c = DomainCorpus::parse("d", "d", src, LabelMode::Labeled).unwrap();
        let again = DomainCorpus::parse("d", "d", &c.to_text(), LabelMode::Labeled).unwrap();
        assert_eq!(c, again);
    }

    fn labeled(pos: usize, neg: usize) -> DomainCorpus {
        let recs = (0..pos)
            .map(|i| (ClassLabel::Positive, format!("p{i}")))
            .chain((0..neg).map(|i| (ClassLabel::Negative, format!("n{i}"))));
        DomainCorpus::labeled("d", recs).unwrap()
    }

    #[test]
    fn folds_partition_and_stratify() {
        let c = labeled(6, 4);
        let folds = split_folds(&c, 5, 7).unwrap();
        assert_eq!(folds.len(), 5);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        let labels = c.labels().unwrap();
        for f in &folds {
            assert_eq!(f.len(), 2);
            let pos = f.iter().filter(|&&i| labels[i] == ClassLabel::Positive).count();
            assert!(pos <= 2);
            assert!(f.len() - pos <= 2);
        }
        // 6 positives over 5 folds: per-class counts are 1 or 2
        let per_fold_pos: Vec<usize> = folds
            .iter()
            .map(|f| f.iter().filter(|&&i| labels[i] == ClassLabel::Positive).count())
            .collect();
        assert_eq!(
            per_fold_pos.iter().max().unwrap() - per_fold_pos.iter().min().unwrap(),
            1
        );
    }

    #[test]
    fn folds_singletons_when_k_equals_n() {
        let folds = split_folds(&labeled(2, 2), 4, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn folds_deterministic() {
        let c = labeled(30, 17);
        assert_eq!(split_folds(&c, 5, 42).unwrap(), split_folds(&c, 5, 42).unwrap());
        assert_ne!(split_folds(&c, 5, 42).unwrap(), split_folds(&c, 5, 43).unwrap());
    }

    #[test]
    fn folds_errors() {
        let c = labeled(2, 2);
        assert!(split_folds(&c, 1, 0).is_err());
        assert!(split_folds(&c, 5, 0).is_err());
        assert!(matches!(
            split_folds(&c.without_labels(), 2, 0),
            Err(Error::Unlabeled(_))
        ));
    }
}
