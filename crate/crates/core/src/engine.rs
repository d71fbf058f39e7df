//! The two-stage lifelong protocol.
//!
//! Initial learning fits a naive Bayes model on a few labeled domains and
//! seeds the knowledge base from each domain's own polarity ranking.
//! Self-study then takes unlabeled domains one at a time: predict with the
//! knowledge-base words only, retrain on the pooled data with the
//! predictions as labels, and credit the new domain's polar words.

use serde::{Deserialize, Serialize};

use crate::corpus::{ClassLabel, DomainCorpus};
use crate::error::{Error, Result};
use crate::evaluation::{self, EvalReport};
use crate::knowledge::KnowledgeBase;
use crate::model::NbModel;
use crate::polarity::{self, PolaritySelection};
use crate::WordSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Additive smoothing constant.
    pub lambda: f64,
    /// Share of frequency-eligible words kept per domain, in percent.
    pub select_percent: f64,
    /// Minimum average occurrences per domain for a word to be ranked.
    pub min_avg_freq: f64,
    pub min_initial_domains: usize,
    /// Gate self-study predictions to knowledge-base words. Off predicts
    /// with the full cumulative vocabulary.
    pub restrict_to_kb: bool,
    /// Prediction passes per self-study domain. Passes after the first
    /// re-predict with the refit model and the domain's own selection added
    /// to the gate.
    pub self_study_passes: usize,
    /// Score domains by re-predicting after the refit instead of scoring
    /// the pseudo-labels themselves.
    pub score_after_refit: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            lambda: 1.0,
            select_percent: 30.0,
            min_avg_freq: 5.0,
            min_initial_domains: 2,
            restrict_to_kb: true,
            self_study_passes: 1,
            score_after_refit: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidArgument(format!("lambda {} outside (0, 1]", self.lambda)));
        }
        if !(self.select_percent > 0.0 && self.select_percent <= 100.0) {
            return Err(Error::InvalidArgument(format!(
                "select percent {} outside (0, 100]",
                self.select_percent
            )));
        }
        if !(self.min_avg_freq >= 0.0 && self.min_avg_freq.is_finite()) {
            return Err(Error::InvalidArgument(
                "minimum frequency must be a finite value >= 0".into(),
            ));
        }
        if self.min_initial_domains < 2 {
            return Err(Error::InvalidArgument(
                "at least two initial domains are required".into(),
            ));
        }
        if self.self_study_passes == 0 {
            return Err(Error::InvalidArgument("self-study needs at least one pass".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Initial,
    SelfStudy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsumedDomain {
    pub name: String,
    pub stage: Stage,
}

#[derive(Clone, Debug)]
pub struct LifelongState {
    model: NbModel,
    kb: KnowledgeBase,
    consumed: Vec<ConsumedDomain>,
    config: EngineConfig,
    initial_selection: Option<PolaritySelection>,
}

#[derive(Clone, Debug)]
pub struct SelfStudyOutcome {
    pub pseudo_labels: Vec<ClassLabel>,
    /// The domain's polarity selection credited to the knowledge base.
    pub selection: PolaritySelection,
    /// All pseudo-labels fell into one class.
    pub single_class: bool,
}

/// Ranks one domain's vocabulary and keeps the configured share of the
/// frequency-eligible words.
fn domain_selection(model: &NbModel, config: &EngineConfig) -> Result<PolaritySelection> {
    let counts = model.term_counts();
    let eligible = polarity::frequency_filter(&[&counts], config.min_avg_freq);
    let degrees = polarity::polarity_degrees(model);
    polarity::select_top_or_empty(&degrees, &eligible, config.select_percent)
}

impl LifelongState {
    /// Initial learning stage over labeled domains.
    pub fn initial_learn(domains: &[DomainCorpus], config: EngineConfig) -> Result<Self> {
        config.validate()?;
        if domains.len() < config.min_initial_domains {
            return Err(Error::InsufficientDomains {
                got: domains.len(),
                need: config.min_initial_domains,
            });
        }
        let mut per_domain = Vec::with_capacity(domains.len());
        for (i, d) in domains.iter().enumerate() {
            if domains[..i].iter().any(|o| o.name() == d.name()) {
                return Err(Error::DuplicateDomain(d.name().to_owned()));
            }
            per_domain.push(NbModel::fit_corpus(d, config.lambda)?);
        }

        let mut model = per_domain[0].clone();
        for m in &per_domain[1..] {
            model.absorb(m);
        }

        let counts: Vec<_> = per_domain.iter().map(NbModel::term_counts).collect();
        let count_refs: Vec<_> = counts.iter().collect();
        let eligible = polarity::frequency_filter(&count_refs, config.min_avg_freq);
        let degrees = polarity::polarity_degrees(&model);
        let initial_selection = polarity::select_top_or_empty(&degrees, &eligible, config.select_percent)?;

        let mut kb = KnowledgeBase::new();
        let mut consumed = Vec::with_capacity(domains.len());
        for (d, m) in domains.iter().zip(&per_domain) {
            let selection = domain_selection(m, &config)?;
            if selection.is_empty() {
                log::warn!("domain {}: no word passed the frequency filter", d.name());
            }
            kb.update(d.name(), &selection)?;
            consumed.push(ConsumedDomain {
                name: d.name().to_owned(),
                stage: Stage::Initial,
            });
        }
        log::info!(
            "initial learning: {} domains, vocabulary {}, knowledge base {} entries",
            domains.len(),
            model.vocabulary_size(),
            kb.len()
        );
        Ok(LifelongState {
            model,
            kb,
            consumed,
            config,
            initial_selection: Some(initial_selection),
        })
    }

    /// Reassembles a state persisted elsewhere.
    pub fn from_parts(
        model: NbModel,
        kb: KnowledgeBase,
        consumed: Vec<ConsumedDomain>,
        config: EngineConfig,
    ) -> Result<Self> {
        config.validate()?;
        for (i, c) in consumed.iter().enumerate() {
            if consumed[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::DuplicateDomain(c.name.clone()));
            }
        }
        Ok(LifelongState {
            model,
            kb,
            consumed,
            config,
            initial_selection: None,
        })
    }

    pub fn model(&self) -> &NbModel {
        &self.model
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn consumed(&self) -> &[ConsumedDomain] {
        &self.consumed
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Selection over the pooled initial domains; absent on reloaded states.
    pub fn initial_selection(&self) -> Option<&PolaritySelection> {
        self.initial_selection.as_ref()
    }

    pub fn has_consumed(&self, name: &str) -> bool {
        self.consumed.iter().any(|c| c.name == name)
    }

    /// Gate applied to self-study predictions.
    pub fn prediction_vocabulary(&self) -> Option<WordSet> {
        self.config.restrict_to_kb.then(|| self.kb.vocabulary(None))
    }

    /// Predicts documents with the current model and gate.
    pub fn predict(&self, corpus: &DomainCorpus) -> Vec<ClassLabel> {
        let gate = self.prediction_vocabulary();
        self.model.predict_all(corpus.documents(), gate.as_ref())
    }

    /// Self-study over one unlabeled domain. Any labels on `domain` are ignored.
    ///
    /// On error the state is left untouched.
    pub fn self_study(&mut self, domain: &DomainCorpus) -> Result<SelfStudyOutcome> {
        let name = domain.name();
        if self.has_consumed(name) || self.kb.has_domain(name) {
            return Err(Error::DuplicateDomain(name.to_owned()));
        }
        if domain.is_empty() {
            return Err(Error::InvalidArgument(format!("domain {name:?} has no documents")));
        }
        let lambda = self.config.lambda;
        let docs = domain.documents();

        let mut gate = self.prediction_vocabulary();
        let mut pseudo = self.model.predict_all(docs, gate.as_ref());
        for pass in 1..self.config.self_study_passes {
            let local = NbModel::fit_allowing_empty_class(docs, &pseudo, lambda)?;
            let candidate = self.model.merged(&local);
            if let Some(g) = gate.as_mut() {
                g.extend(domain_selection(&local, &self.config)?.selected_words().iter().cloned());
            }
            let next = candidate.predict_all(docs, gate.as_ref());
            let changed = next.iter().zip(&pseudo).filter(|(a, b)| a != b).count();
            log::debug!("domain {name}: pass {} changed {changed} pseudo-labels", pass + 1);
            pseudo = next;
            if changed == 0 {
                break;
            }
        }

        let single_class = pseudo.iter().all(|&l| l == pseudo[0]);
        if single_class {
            log::warn!(
                "domain {name}: every pseudo-label is {}; continuing with a one-class update",
                pseudo[0]
            );
        }
        let local = NbModel::fit_allowing_empty_class(docs, &pseudo, lambda)?;
        let selection = domain_selection(&local, &self.config)?;

        let mut kb = self.kb.clone();
        kb.update(name, &selection)?;
        self.kb = kb;
        self.model.absorb(&local);
        self.consumed.push(ConsumedDomain {
            name: name.to_owned(),
            stage: Stage::SelfStudy,
        });
        Ok(SelfStudyOutcome {
            pseudo_labels: pseudo,
            selection,
            single_class,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SequenceOutcome {
    pub state: LifelongState,
    pub pseudo_labels: Vec<(String, Vec<ClassLabel>)>,
    pub report: EvalReport,
}

/// Initial learning on `labeled`, then self-study over `unlabeled` in order.
///
/// Unlabeled domains that carry labels are treated as evaluation domains:
/// the labels never reach the learner but each domain is scored against
/// them in the returned report.
pub fn run_sequence(
    labeled: &[DomainCorpus],
    unlabeled: &[DomainCorpus],
    config: EngineConfig,
) -> Result<SequenceOutcome> {
    let mut state = LifelongState::initial_learn(labeled, config)?;
    let mut pseudo_labels = Vec::with_capacity(unlabeled.len());
    let mut report = EvalReport::new();
    for domain in unlabeled {
        let outcome = state.self_study(&domain.without_labels())?;
        if let Some(gold) = domain.labels() {
            let scored = if state.config.score_after_refit {
                state.predict(domain)
            } else {
                outcome.pseudo_labels.clone()
            };
            let f1 = evaluation::macro_f1(&scored, gold)?;
            log::info!("domain {}: macro-F1 {f1:.4}", domain.name());
            report.push(domain.name(), evaluation::SYSTEM_LIFELONG, f1);
        }
        pseudo_labels.push((domain.name().to_owned(), outcome.pseudo_labels));
    }
    Ok(SequenceOutcome {
        state,
        pseudo_labels,
        report,
    })
}

/// `index TAB label` lines, one per document.
pub fn format_pseudo_labels(labels: &[ClassLabel]) -> String {
    labels.iter().enumerate().map(|(i, l)| format!("{i}\t{l}\n")).collect()
}
