//! Polarity degrees and top-percent word selection.
//!
//! The degree of word `w` towards class `c` is `P(w|c) / P(w)` where `P(w)`
//! is the prior-weighted mixture `Σ_c P(c) P(w|c)` of smoothed likelihoods,
//! so `Σ_c P(c) O_c(w) = 1` for every word.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use crate::corpus::ClassLabel;
use crate::error::{Error, Result};
use crate::model::NbModel;
use crate::WordSet;

/// Per-domain token totals, both classes combined.
pub type TermCounts = HashMap<String, u64>;

#[derive(Clone, Debug, PartialEq)]
pub struct PolarityDegree {
    pub word: String,
    pub degree_pos: f64,
    pub degree_neg: f64,
}

impl PolarityDegree {
    pub fn degree(&self, class: ClassLabel) -> f64 {
        match class {
            ClassLabel::Positive => self.degree_pos,
            ClassLabel::Negative => self.degree_neg,
        }
    }

    /// Class with the larger degree; ties go to positive.
    pub fn dominant_class(&self) -> ClassLabel {
        if self.degree_pos >= self.degree_neg {
            ClassLabel::Positive
        } else {
            ClassLabel::Negative
        }
    }

    pub fn dominant_degree(&self) -> f64 {
        self.degree_pos.max(self.degree_neg)
    }
}

/// Total order used for selection: dominant degree descending, then word.
pub fn rank_order(a: &PolarityDegree, b: &PolarityDegree) -> Ordering {
    b.dominant_degree()
        .total_cmp(&a.dominant_degree())
        .then_with(|| a.word.cmp(&b.word))
}

/// Degrees for every vocabulary word, sorted by word.
///
/// A class without training documents has prior zero and no evidence; its
/// degree is reported as zero so that the identity above still holds.
pub fn polarity_degrees(model: &NbModel) -> Vec<PolarityDegree> {
    let priors = model.priors();
    let mut out: Vec<PolarityDegree> = model
        .vocabulary()
        .map(|w| {
            let lp = model.word_likelihood(w, ClassLabel::Positive);
            let ln = model.word_likelihood(w, ClassLabel::Negative);
            let pw = priors[0] * lp + priors[1] * ln;
            let deg = |prior: f64, l: f64| if prior == 0.0 { 0.0 } else { l / pw };
            PolarityDegree {
                word: w.to_owned(),
                degree_pos: deg(priors[0], lp),
                degree_neg: deg(priors[1], ln),
            }
        })
        .collect();
    out.sort_unstable_by(|a, b| a.word.cmp(&b.word));
    out
}

/// Words whose total count over the given domains reaches
/// `min_avg_per_domain` times the number of domains.
pub fn frequency_filter(domains: &[&TermCounts], min_avg_per_domain: f64) -> WordSet {
    let mut totals: HashMap<&str, u64> = HashMap::new();
    for counts in domains {
        for (w, &n) in counts.iter() {
            *totals.entry(w.as_str()).or_insert(0) += n;
        }
    }
    let threshold = min_avg_per_domain * domains.len() as f64;
    totals
        .into_iter()
        .filter(|&(_, n)| n as f64 >= threshold)
        .map(|(w, _)| w.to_owned())
        .collect()
}

/// Number of words kept at `percent` out of `eligible`: `ceil(p/100 · n)`.
pub fn selection_size(percent: f64, eligible: usize) -> usize {
    let raw = percent * eligible as f64 / 100.0;
    // absorb representation error such as 3.0000000000000004
    let k = (raw - 1e-9).ceil().max(0.0) as usize;
    k.clamp(usize::from(eligible > 0), eligible)
}

fn check_percent(percent: f64) -> Result<()> {
    if !(percent > 0.0 && percent <= 100.0) {
        return Err(Error::InvalidArgument(format!("percent {percent} outside (0, 100]")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolaritySelection {
    percent: f64,
    /// Selected words in rank order, strongest first.
    entries: Vec<PolarityDegree>,
    selected: WordSet,
    eligible_count: usize,
}

impl PolaritySelection {
    /// A selection with nothing in it, used when no word passed the filter.
    pub fn empty(percent: f64) -> Self {
        PolaritySelection {
            percent,
            entries: Vec::new(),
            selected: WordSet::new(),
            eligible_count: 0,
        }
    }

    pub fn percent(&self) -> f64 {
        self.percent
    }

    pub fn entries(&self) -> &[PolarityDegree] {
        &self.entries
    }

    pub fn selected_words(&self) -> &WordSet {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eligible_count(&self) -> usize {
        self.eligible_count
    }

    /// `word TAB dominant_class TAB dominant_degree` lines in rank order.
    pub fn write_export<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.entries {
            writeln!(
                w,
                "{}\t{}\t{}",
                e.word,
                e.dominant_class(),
                crate::fmt_exact(e.dominant_degree())
            )?;
        }
        Ok(())
    }
}

/// Restricts `degrees` to `eligible`, ranks them and keeps the top `percent`.
pub fn select_top(degrees: &[PolarityDegree], eligible: &WordSet, percent: f64) -> Result<PolaritySelection> {
    check_percent(percent)?;
    let mut ranked: Vec<PolarityDegree> = degrees.iter().filter(|d| eligible.contains(&d.word)).cloned().collect();
    if ranked.is_empty() {
        return Err(Error::EmptySelection);
    }
    let eligible_count = ranked.len();
    ranked.sort_by(rank_order);
    ranked.truncate(selection_size(percent, eligible_count));
    let selected = ranked.iter().map(|d| d.word.clone()).collect();
    Ok(PolaritySelection {
        percent,
        entries: ranked,
        selected,
        eligible_count,
    })
}

/// [`select_top`], except that an empty eligible set yields an empty selection.
pub fn select_top_or_empty(degrees: &[PolarityDegree], eligible: &WordSet, percent: f64) -> Result<PolaritySelection> {
    match select_top(degrees, eligible, percent) {
        Err(Error::EmptySelection) => Ok(PolaritySelection::empty(percent)),
        other => other,
    }
}

/// Sorted copy of a word set, for stable output.
pub fn sorted_words(words: &WordSet) -> Vec<&str> {
    let set: BTreeSet<&str> = words.iter().map(String::as_str).collect();
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use ClassLabel::*;

    fn example() -> NbModel {
        let docs = [Document::new("good good movie"), Document::new("bad movie")];
        NbModel::fit(&docs, &[Positive, Negative], 1.0).unwrap()
    }

    #[test]
    fn degrees_hand_computed() {
        let degrees = polarity_degrees(&example());
        let good = degrees.iter().find(|d| d.word == "good").unwrap();
        // P(good) = 0.5*0.5 + 0.5*0.2 = 0.35
        assert!((good.degree_pos - 0.5 / 0.35).abs() < 1e-12);
        assert!((good.degree_neg - 0.2 / 0.35).abs() < 1e-12);
        assert_eq!(good.dominant_class(), Positive);
        for d in &degrees {
            assert!((0.5 * d.degree_pos + 0.5 * d.degree_neg - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neutral_word_has_unit_degrees() {
        let docs = [Document::new("same a"), Document::new("same b")];
        let m = NbModel::fit(&docs, &[Positive, Negative], 1.0).unwrap();
        let same = polarity_degrees(&m).into_iter().find(|d| d.word == "same").unwrap();
        assert_eq!(same.degree_pos, 1.0);
        assert_eq!(same.degree_neg, 1.0);
        assert_eq!(same.dominant_class(), Positive);
    }

    #[test]
    fn empty_class_degree_is_zero() {
        let docs = [Document::new("a b"), Document::new("a")];
        let m = NbModel::fit_allowing_empty_class(&docs, &[Positive, Positive], 1.0).unwrap();
        for d in polarity_degrees(&m) {
            assert_eq!(d.degree_neg, 0.0);
            assert!((d.degree_pos - 1.0).abs() < 1e-12);
        }
    }

    fn counts(pairs: &[(&str, u64)]) -> TermCounts {
        pairs.iter().map(|(w, n)| (w.to_string(), *n)).collect()
    }

    #[test]
    fn frequency_filter_rule() {
        let a = counts(&[("kept", 7), ("dropped", 4), ("zero", 0)]);
        let b = counts(&[("kept", 5), ("dropped", 5)]);
        let set = frequency_filter(&[&a, &b], 5.0);
        assert!(set.contains("kept")); // 12 >= 10
        assert!(!set.contains("dropped")); // 9 < 10
        let all = frequency_filter(&[&a, &b], 0.0);
        assert_eq!(all.len(), 3);
    }

    fn table(values: &[(&str, f64, f64)]) -> Vec<PolarityDegree> {
        values
            .iter()
            .map(|(w, p, n)| PolarityDegree {
                word: w.to_string(),
                degree_pos: *p,
                degree_neg: *n,
            })
            .collect()
    }

    #[test]
    fn select_top_thirty_percent_of_ten() {
        let degrees: Vec<PolarityDegree> = (0..10)
            .map(|i| PolarityDegree {
                word: format!("w{i}"),
                degree_pos: 1.0 + i as f64 * 0.1,
                degree_neg: 0.5,
            })
            .collect();
        let eligible: WordSet = degrees.iter().map(|d| d.word.clone()).collect();
        let sel = select_top(&degrees, &eligible, 30.0).unwrap();
        assert_eq!(sel.len(), 3);
        let words: Vec<&str> = sel.entries().iter().map(|d| d.word.as_str()).collect();
        assert_eq!(words, ["w9", "w8", "w7"]);
        let all = select_top(&degrees, &eligible, 100.0).unwrap();
        assert_eq!(all.selected_words(), &eligible);
    }

    #[test]
    fn ties_break_lexicographically() {
        let degrees = table(&[("b", 2.0, 0.1), ("a", 0.1, 2.0), ("c", 2.0, 0.1)]);
        let eligible: WordSet = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let sel = select_top(&degrees, &eligible, 100.0).unwrap();
        let words: Vec<&str> = sel.entries().iter().map(|d| d.word.as_str()).collect();
        assert_eq!(words, ["a", "b", "c"]);
    }

    #[test]
    fn select_top_errors() {
        let degrees = table(&[("a", 1.0, 1.0)]);
        let eligible: WordSet = ["a".to_string()].into_iter().collect();
        assert!(select_top(&degrees, &eligible, 0.0).is_err());
        assert!(select_top(&degrees, &eligible, 100.5).is_err());
        assert!(matches!(
            select_top(&degrees, &WordSet::new(), 50.0),
            Err(Error::EmptySelection)
        ));
        assert!(select_top_or_empty(&degrees, &WordSet::new(), 50.0).unwrap().is_empty());
    }

    #[test]
    fn selection_size_is_exact_ceiling() {
        assert_eq!(selection_size(30.0, 10), 3);
        assert_eq!(selection_size(10.0, 10), 1);
        assert_eq!(selection_size(31.0, 10), 4);
        assert_eq!(selection_size(0.1, 10), 1);
        assert_eq!(selection_size(100.0, 7), 7);
        assert_eq!(selection_size(70.0, 10), 7);
    }

    #[test]
    fn export_lines() {
        let degrees = table(&[("bad", 0.2, 1.8), ("good", 1.5, 0.5)]);
        let eligible: WordSet = ["bad", "good"].iter().map(|s| s.to_string()).collect();
        let sel = select_top(&degrees, &eligible, 100.0).unwrap();
        let mut buf = Vec::new();
        sel.write_export(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bad\tneg\t1.8000000000000000e0\ngood\tpos\t1.5000000000000000e0\n"
        );
    }
}
