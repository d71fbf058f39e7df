//! Lifelong sentiment classification with multinomial naive Bayes.
//!
//! A small set of labeled domains seeds a naive Bayes model and a knowledge
//! base of polarity words. Further domains arrive unlabeled: the model
//! pseudo-labels them using only knowledge-base words, retrains on its own
//! predictions and credits the polar words it discovers back to the
//! knowledge base.
//!
//! The crate is organised bottom-up:
//!
//! - [`corpus`]: domain files, whitespace tokenization, stratified folds
//! - [`model`]: Laplace-smoothed multinomial naive Bayes in log space
//! - [`polarity`]: polarity degrees, frequency filter, top-percent selection
//! - [`knowledge`]: the cumulative polarity knowledge base
//! - [`engine`]: initial learning and self-study stages
//! - [`evaluation`]: macro-F1, baselines, percentage sweep, reports
//! - [`state`]: on-disk state directories and run manifests used by the CLI
//! - [`synthetic`]: seeded multi-domain review generator with a planted lexicon

pub mod corpus;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod knowledge;
pub mod model;
pub mod polarity;
pub mod state;
pub mod synthetic;

pub use corpus::{ClassLabel, Document, DomainCorpus, LabelMode};
pub use engine::{EngineConfig, LifelongState};
pub use error::{Error, Result};
pub use evaluation::EvalReport;
pub use knowledge::{KbEntry, KnowledgeBase};
pub use model::{NbModel, Posterior};
pub use polarity::{PolarityDegree, PolaritySelection};

/// Set of words used to gate which tokens take part in a decision.
pub type WordSet = std::collections::HashSet<String>;

/// Formats a float with 17 significant digits, enough for an exact round-trip.
pub(crate) fn fmt_exact(x: f64) -> String {
    format!("{:.16e}", x)
}
