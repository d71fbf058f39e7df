//! Scoring and experiment harness: macro-F1, the source-only and in-domain
//! baselines, the vocabulary-percentage sweep, and plain-text reports.

use std::fmt::Write as _;

use crate::corpus::{split_folds, ClassLabel, DomainCorpus};
use crate::engine::{self, EngineConfig};
use crate::error::{Error, Result};
use crate::model::NbModel;
use crate::polarity;
use crate::WordSet;

pub const SYSTEM_SOURCE_ONLY: &str = "NB-S";
pub const SYSTEM_IN_DOMAIN: &str = "NB-T";
pub const SYSTEM_LIFELONG: &str = "SU-LML";

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_FOLDS: usize = 5;
pub const AVERAGE_ROW: &str = "Average";

/// Unweighted mean of the two per-class F1 scores.
///
/// Per-class F1 is `2tp / (2tp + fp + fn)`, zero when the class appears in
/// neither the predictions nor the gold labels.
pub fn macro_f1(predictions: &[ClassLabel], gold: &[ClassLabel]) -> Result<f64> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::InvalidArgument("macro-F1 of an empty sequence".into()));
    }
    let mut sum = 0.0;
    for class in ClassLabel::ALL {
        let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
        for (&p, &g) in predictions.iter().zip(gold) {
            match (p == class, g == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let denom = 2 * tp + fp + fn_;
        if denom > 0 {
            sum += (2 * tp) as f64 / denom as f64;
        }
    }
    Ok(sum / 2.0)
}

fn check_class_counts(domain: &DomainCorpus, k: usize) -> Result<()> {
    let counts = domain
        .class_counts()
        .ok_or_else(|| Error::Unlabeled(domain.name().to_owned()))?;
    for class in ClassLabel::ALL {
        let have = counts[class.index()];
        if have < k {
            return Err(Error::InsufficientClassCount {
                domain: domain.name().to_owned(),
                class,
                have,
                need: k,
            });
        }
    }
    Ok(())
}

/// Out-of-fold predictions for every document, in document order.
///
/// `gates` maps each training-fold model to one or more decision gates;
/// the result holds one prediction vector per gate.
fn cross_val_predict<G>(
    domain: &DomainCorpus,
    k: usize,
    seed: u64,
    lambda: f64,
    gates: G,
) -> Result<Vec<Vec<ClassLabel>>>
where
    G: Fn(&NbModel) -> Result<Vec<Option<WordSet>>>,
{
    check_class_counts(domain, k)?;
    let folds = split_folds(domain, k, seed)?;
    let mut out: Vec<Vec<Option<ClassLabel>>> = Vec::new();
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let model = NbModel::fit_corpus(&domain.subset(&train), lambda)?;
        let gate_sets = gates(&model)?;
        if out.is_empty() {
            out = vec![vec![None; domain.len()]; gate_sets.len()];
        }
        for (slot, gate) in out.iter_mut().zip(&gate_sets) {
            for &i in test {
                slot[i] = Some(model.decide(&domain.documents()[i], gate.as_ref()));
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|v| v.into_iter().map(|p| p.expect("folds cover every document")).collect())
        .collect())
}

/// In-domain supervised baseline: stratified k-fold, pooled out-of-fold
/// predictions scored once.
pub fn nbt_baseline(domain: &DomainCorpus, k: usize, seed: u64, config: &EngineConfig) -> Result<f64> {
    let gold = domain.require_labels()?;
    let preds = cross_val_predict(domain, k, seed, config.lambda, |_| Ok(vec![None]))?;
    macro_f1(&preds[0], gold)
}

/// Source-only baseline: pooled source model, full vocabulary, scored on the target.
pub fn nbs_baseline(sources: &[DomainCorpus], target: &DomainCorpus, config: &EngineConfig) -> Result<f64> {
    let gold = target.require_labels()?;
    let model = pooled_model(sources, config.lambda)?;
    macro_f1(&model.predict_all(target.documents(), None), gold)
}

/// Fit on the union of labeled domains.
pub fn pooled_model(domains: &[DomainCorpus], lambda: f64) -> Result<NbModel> {
    let (first, rest) = domains
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("no source domains".into()))?;
    let mut model = NbModel::fit_corpus(first, lambda)?;
    for d in rest {
        model.absorb(&NbModel::fit_corpus(d, lambda)?);
    }
    Ok(model)
}

/// Macro-F1 per domain and percentage.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub seed: u64,
    pub percents: Vec<f64>,
    pub rows: Vec<(String, Vec<f64>)>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn percent_label(p: f64) -> String {
    format!("{p}%")
}

impl SweepTable {
    pub fn averages(&self) -> Vec<f64> {
        (0..self.percents.len())
            .map(|j| mean(self.rows.iter().map(|(_, v)| v[j])))
            .collect()
    }

    pub fn column(&self, percent: f64) -> Option<Vec<f64>> {
        let j = self.percents.iter().position(|&p| p == percent)?;
        Some(self.rows.iter().map(|(_, v)| v[j]).collect())
    }

    /// `domain TAB percent TAB score` lines, average rows last.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# seed\t{}\n", self.seed);
        for (domain, scores) in &self.rows {
            for (p, s) in self.percents.iter().zip(scores) {
                let _ = writeln!(out, "{domain}\t{}\t{s}", percent_label(*p));
            }
        }
        for (p, s) in self.percents.iter().zip(self.averages()) {
            let _ = writeln!(out, "{AVERAGE_ROW}\t{}\t{s}", percent_label(*p));
        }
        out
    }

    pub fn render_table(&self) -> String {
        let columns: Vec<String> = self.percents.iter().map(|p| percent_label(*p)).collect();
        let mut rows: Vec<(String, Vec<Option<f64>>)> = self
            .rows
            .iter()
            .map(|(d, v)| (d.clone(), v.iter().copied().map(Some).collect()))
            .collect();
        rows.push((AVERAGE_ROW.to_owned(), self.averages().into_iter().map(Some).collect()));
        render_grid(&format!("# seed {}", self.seed), "Domain", &columns, &rows)
    }
}

/// Vocabulary-percentage sweep.
///
/// For every domain and fold, the training split's words are ranked by
/// polarity degree among those passing the frequency filter, and decisions
/// are gated to the top `p` percent. The 100% column is the ungated
/// classifier, so it reproduces [`nbt_baseline`] exactly.
pub fn percentage_sweep(
    domains: &[DomainCorpus],
    percents: &[f64],
    k: usize,
    seed: u64,
    config: &EngineConfig,
) -> Result<SweepTable> {
    for &p in percents {
        if !(p > 0.0 && p <= 100.0) {
            return Err(Error::InvalidArgument(format!("percent {p} outside (0, 100]")));
        }
    }
    let mut rows = Vec::with_capacity(domains.len());
    for domain in domains {
        let gold = domain.require_labels()?;
        let preds = cross_val_predict(domain, k, seed, config.lambda, |model| {
            let counts = model.term_counts();
            let eligible = polarity::frequency_filter(&[&counts], config.min_avg_freq);
            let degrees = polarity::polarity_degrees(model);
            percents
                .iter()
                .map(|&p| {
                    if p >= 100.0 {
                        Ok(None)
                    } else {
                        let sel = polarity::select_top_or_empty(&degrees, &eligible, p)?;
                        Ok(Some(sel.selected_words().clone()))
                    }
                })
                .collect()
        })?;
        let scores = preds.iter().map(|p| macro_f1(p, gold)).collect::<Result<Vec<_>>>()?;
        rows.push((domain.name().to_owned(), scores));
    }
    Ok(SweepTable {
        seed,
        percents: percents.to_vec(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub domain: String,
    pub system: String,
    pub score: f64,
}

/// Per-domain scores for named systems.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub seed: u64,
    rows: Vec<ReportRow>,
}

impl Default for EvalReport {
    fn default() -> Self {
        EvalReport {
            seed: DEFAULT_SEED,
            rows: Vec::new(),
        }
    }
}

impl EvalReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_seed(seed: u64) -> Self {
        EvalReport { seed, rows: Vec::new() }
    }

    pub fn push(&mut self, domain: &str, system: &str, score: f64) {
        self.rows.push(ReportRow {
            domain: domain.to_owned(),
            system: system.to_owned(),
            score,
        });
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn extend(&mut self, other: &EvalReport) {
        self.rows.extend(other.rows.iter().cloned());
    }

    /// Systems in order of first appearance.
    pub fn systems(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.system.as_str()) {
                out.push(&r.system);
            }
        }
        out
    }

    pub fn domains(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.domain.as_str()) {
                out.push(&r.domain);
            }
        }
        out
    }

    pub fn score(&self, domain: &str, system: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.domain == domain && r.system == system)
            .map(|r| r.score)
    }

    /// Arithmetic mean of a system's rows.
    pub fn average(&self, system: &str) -> Option<f64> {
        let scores: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.system == system)
            .map(|r| r.score)
            .collect();
        (!scores.is_empty()).then(|| mean(scores.into_iter()))
    }

    /// Machine-readable form: a seed header, then `domain TAB system TAB score`.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# seed\t{}\n", self.seed);
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}", r.domain, r.system, r.score);
        }
        for s in self.systems() {
            let _ = writeln!(out, "{AVERAGE_ROW}\t{s}\t{}", self.average(s).unwrap_or(f64::NAN));
        }
        out
    }

    /// Parses [`EvalReport::to_tsv`] output. Average rows are recomputed, not read.
    pub fn from_tsv(text: &str, origin: &str) -> Result<Self> {
        let mut report = EvalReport::new();
        for (i, line) in text.lines().enumerate() {
            let bad = |m: &str| Error::parse(origin, i + 1, m);
            if line.is_empty() {
                continue;
            }
            if let Some(seed) = line.strip_prefix("# seed\t") {
                report.seed = seed.parse().map_err(|_| bad("bad seed"))?;
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [domain, system, score] = fields[..] else {
                return Err(bad("expected domain TAB system TAB score"));
            };
            if domain == AVERAGE_ROW {
                continue;
            }
            let score: f64 = score.parse().map_err(|_| bad("bad score"))?;
            report.push(domain, system, score);
        }
        Ok(report)
    }

    /// Aligned table: one row per domain, one column per system, average last.
    pub fn render_table(&self) -> String {
        let systems = self.systems();
        let columns: Vec<String> = systems.iter().map(|s| s.to_string()).collect();
        let mut rows: Vec<(String, Vec<Option<f64>>)> = self
            .domains()
            .into_iter()
            .map(|d| (d.to_owned(), systems.iter().map(|s| self.score(d, s)).collect()))
            .collect();
        rows.push((
            AVERAGE_ROW.to_owned(),
            systems.iter().map(|s| self.average(s)).collect(),
        ));
        render_grid(&format!("# seed {}", self.seed), "Domain", &columns, &rows)
    }
}

fn render_grid(header: &str, corner: &str, columns: &[String], rows: &[(String, Vec<Option<f64>>)]) -> String {
    let first = rows
        .iter()
        .map(|(d, _)| d.len())
        .chain([corner.len()])
        .max()
        .unwrap_or(0);
    let widths: Vec<usize> = columns.iter().map(|c| c.len().max(6)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "{header}");
    let _ = write!(out, "{corner:<first$}");
    for (c, w) in columns.iter().zip(&widths) {
        let _ = write!(out, "  {c:>w$}");
    }
    out.push('\n');
    for (domain, cells) in rows {
        let _ = write!(out, "{domain:<first$}");
        for (cell, w) in cells.iter().zip(&widths) {
            match cell {
                Some(v) => {
                    let _ = write!(out, "  {v:>w$.4}");
                }
                None => {
                    let _ = write!(out, "  {:>w$}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Source-only, in-domain and lifelong scores for every target domain.
///
/// Targets are consumed by self-study in the given order; their labels are
/// used for scoring and for the in-domain baseline only.
pub fn compare_systems(
    sources: &[DomainCorpus],
    targets: &[DomainCorpus],
    k: usize,
    seed: u64,
    config: &EngineConfig,
) -> Result<EvalReport> {
    let source_model = pooled_model(sources, config.lambda)?;
    let lifelong = engine::run_sequence(sources, targets, config.clone())?;
    let mut report = EvalReport::with_seed(seed);
    for target in targets {
        let gold = target.require_labels()?;
        let nbs = macro_f1(&source_model.predict_all(target.documents(), None), gold)?;
        let nbt = nbt_baseline(target, k, seed, config)?;
        let lml = lifelong
            .report
            .score(target.name(), SYSTEM_LIFELONG)
            .expect("labeled targets are scored by the sequence");
        report.push(target.name(), SYSTEM_SOURCE_ONLY, nbs);
        report.push(target.name(), SYSTEM_IN_DOMAIN, nbt);
        report.push(target.name(), SYSTEM_LIFELONG, lml);
    }
    Ok(report)
}
