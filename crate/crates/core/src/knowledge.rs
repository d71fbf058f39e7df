//! Cumulative polarity knowledge base.
//!
//! Every domain credits the words of its polarity selection once. A word of
//! rank `r` among `S` selected words gains `1 + (S - r) / (S - 1)` on its
//! `(word, dominant class)` entry, so the strongest word gains 2 and the
//! weakest gains 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::corpus::ClassLabel;
use crate::error::{Error, Result};
use crate::polarity::PolaritySelection;
use crate::{fmt_exact, WordSet};

pub const KB_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct KbEntry {
    pub word: String,
    pub class: ClassLabel,
    pub score: f64,
    pub domains_seen: BTreeSet<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KnowledgeBase {
    entries: BTreeMap<(String, ClassLabel), KbEntry>,
    update_log: Vec<(String, usize)>,
}

/// Rank bonus for the word at 1-based `rank` among `size` selected words.
pub fn rank_bonus(rank: usize, size: usize) -> f64 {
    if size <= 1 {
        1.0
    } else {
        (size - rank) as f64 / (size - 1) as f64
    }
}

fn check_domain_name(domain: &str) -> Result<()> {
    if domain.is_empty() || domain.contains(['\t', '\n', '\r', ',']) {
        return Err(Error::InvalidArgument(format!(
            "domain name {domain:?} must be non-empty and free of tabs, commas and newlines"
        )));
    }
    Ok(())
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &KbEntry> {
        self.entries.values()
    }

    pub fn get(&self, word: &str, class: ClassLabel) -> Option<&KbEntry> {
        self.entries.get(&(word.to_owned(), class))
    }

    pub fn update_log(&self) -> &[(String, usize)] {
        &self.update_log
    }

    pub fn has_domain(&self, domain: &str) -> bool {
        self.update_log.iter().any(|(d, _)| d == domain)
    }

    /// Credits `domain` with its selection. Each domain may be credited once.
    pub fn update(&mut self, domain: &str, selection: &PolaritySelection) -> Result<()> {
        check_domain_name(domain)?;
        if self.has_domain(domain) {
            return Err(Error::DuplicateDomain(domain.to_owned()));
        }
        let size = selection.len();
        for (i, degree) in selection.entries().iter().enumerate() {
            let class = degree.dominant_class();
            let entry = self
                .entries
                .entry((degree.word.clone(), class))
                .or_insert_with(|| KbEntry {
                    word: degree.word.clone(),
                    class,
                    score: 0.0,
                    domains_seen: BTreeSet::new(),
                });
            entry.score += 1.0 + rank_bonus(i + 1, size);
            entry.domains_seen.insert(domain.to_owned());
        }
        self.update_log.push((domain.to_owned(), size));
        Ok(())
    }

    /// Highest-scoring entries of `class`, ties broken by word.
    pub fn top_k(&self, class: ClassLabel, k: usize) -> Vec<&KbEntry> {
        let mut v: Vec<&KbEntry> = self.entries.values().filter(|e| e.class == class).collect();
        v.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.word.cmp(&b.word)));
        v.truncate(k);
        v
    }

    /// Words with at least one entry, optionally restricted to one class.
    pub fn vocabulary(&self, class: Option<ClassLabel>) -> WordSet {
        self.entries
            .values()
            .filter(|e| class.is_none_or(|c| e.class == c))
            .map(|e| e.word.clone())
            .collect()
    }

    /// Class with the higher score for `word`, if it has any entry.
    pub fn orientation(&self, word: &str) -> Option<ClassLabel> {
        let p = self.get(word, ClassLabel::Positive).map(|e| e.score);
        let n = self.get(word, ClassLabel::Negative).map(|e| e.score);
        match (p, n) {
            (None, None) => None,
            (Some(_), None) => Some(ClassLabel::Positive),
            (None, Some(_)) => Some(ClassLabel::Negative),
            (Some(p), Some(n)) => Some(if p >= n {
                ClassLabel::Positive
            } else {
                ClassLabel::Negative
            }),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "kbversion {KB_VERSION}")?;
        for e in self.entries.values() {
            let domains: Vec<&str> = e.domains_seen.iter().map(String::as_str).collect();
            writeln!(
                w,
                "entry\t{}\t{}\t{}\t{}",
                e.word,
                e.class,
                fmt_exact(e.score),
                domains.join(",")
            )?;
        }
        for (domain, size) in &self.update_log {
            writeln!(w, "log\t{domain}\t{size}")?;
        }
        writeln!(w, "end\t{}\t{}", self.entries.len(), self.update_log.len())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("knowledge base text is UTF-8")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }

    pub fn read_from<R: BufRead>(r: R, origin: &str) -> Result<Self> {
        let mut kb = KnowledgeBase::new();
        let mut header = false;
        let mut ended = false;
        let mut last = 0;
        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            last = lineno;
            let line = line.map_err(|e| Error::io(origin, e))?;
            let bad = |msg: &str| Error::parse(origin, lineno, msg);
            if ended {
                return Err(bad("content after end marker"));
            }
            if !header {
                match line.split_once(' ') {
                    Some(("kbversion", v)) if v == KB_VERSION.to_string() => header = true,
                    Some(("kbversion", _)) => return Err(Error::VersionMismatch(origin.to_owned())),
                    _ => return Err(bad("missing kbversion header")),
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["entry", word, class, score, domains] => {
                    if !kb.update_log.is_empty() {
                        return Err(bad("entry after log lines"));
                    }
                    let class: ClassLabel = class.parse().map_err(|e: String| bad(&e))?;
                    let score: f64 = score.parse().map_err(|_| bad("bad score"))?;
                    let domains_seen: BTreeSet<String> = domains
                        .split(',')
                        .filter(|d| !d.is_empty())
                        .map(str::to_owned)
                        .collect();
                    if word.is_empty() || domains_seen.is_empty() {
                        return Err(bad("entry needs a word and at least one domain"));
                    }
                    let key = ((*word).to_owned(), class);
                    if kb.entries.contains_key(&key) {
                        return Err(bad("duplicate entry"));
                    }
                    kb.entries.insert(
                        key,
                        KbEntry {
                            word: (*word).to_owned(),
                            class,
                            score,
                            domains_seen,
                        },
                    );
                }
                ["log", domain, size] => {
                    let size: usize = size.parse().map_err(|_| bad("bad selection size"))?;
                    kb.update_log.push(((*domain).to_owned(), size));
                }
                ["end", entries, logs] => {
                    let ok = entries.parse() == Ok(kb.entries.len()) && logs.parse() == Ok(kb.update_log.len());
                    if !ok {
                        return Err(bad("record counts do not match end marker"));
                    }
                    ended = true;
                }
                _ => return Err(bad("unrecognised line")),
            }
        }
        if !header {
            return Err(Error::parse(origin, 1, "missing kbversion header"));
        }
        if !ended {
            return Err(Error::parse(origin, last + 1, "truncated file: missing end marker"));
        }
        Ok(kb)
    }
}
