//! Seeded generator of multi-domain review corpora with a known lexicon.
//!
//! Every domain shares the same planted polar words. A document of class
//! `c` draws each token from the polar lexicon with probability
//! `polar_rate`; a polar token comes from `c`'s own half of the lexicon
//! with probability `r / (r + 1)`, so every planted word is exactly `r`
//! times likelier under its own class. All other tokens come from the
//! domain's private neutral vocabulary (Zipf-distributed, class-independent).
//!
//! Domains from `emerging_from` onwards additionally use an emerging polar
//! lexicon, drawn with probability `emerging_rate` per token under the same
//! class ratio. Earlier domains never contain these words, which models new
//! domains bringing sentiment vocabulary the first domains lacked.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ClassLabel, DomainCorpus};
use crate::error::{Error, Result};

pub const POSITIVE_WORDS: [&str; 10] = [
    "great",
    "excellent",
    "love",
    "perfect",
    "happy",
    "recommend",
    "best",
    "amazing",
    "sturdy",
    "reliable",
];
pub const NEGATIVE_WORDS: [&str; 10] = [
    "refund",
    "garbage",
    "junk",
    "waste",
    "worst",
    "terrible",
    "useless",
    "defective",
    "broke",
    "awful",
];
pub const EMERGING_POSITIVE_WORDS: [&str; 10] = [
    "flawless", "gorgeous", "comfy", "snug", "crisp", "vivid", "smooth", "cozy", "elegant", "durable",
];
pub const EMERGING_NEGATIVE_WORDS: [&str; 10] = [
    "flimsy", "itchy", "blurry", "laggy", "leaky", "noisy", "wobbly", "scratchy", "dull", "cheap",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub domains: usize,
    pub docs_per_domain: usize,
    /// Share of positive documents.
    pub positive_fraction: f64,
    /// Planted polar words per class, at most 10.
    pub polar_per_class: usize,
    /// Own-class over opposite-class likelihood of every planted word.
    pub polar_ratio: f64,
    /// Probability that a token is a polar word.
    pub polar_rate: f64,
    /// Emerging polar words per class, at most 10; zero disables them.
    pub emerging_per_class: usize,
    /// First domain index that uses the emerging lexicon.
    pub emerging_from: usize,
    /// Probability that a token is an emerging polar word.
    pub emerging_rate: f64,
    pub neutral_per_domain: usize,
    pub zipf_exponent: f64,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            domains: 8,
            docs_per_domain: 500,
            positive_fraction: 0.6,
            polar_per_class: 10,
            polar_ratio: 4.0,
            polar_rate: 0.08,
            emerging_per_class: 10,
            emerging_from: 3,
            emerging_rate: 0.12,
            neutral_per_domain: 200,
            zipf_exponent: 1.0,
            min_len: 25,
            max_len: 75,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.domains > 0
            && self.docs_per_domain >= 2
            && self.positive_fraction > 0.0
            && self.positive_fraction < 1.0
            && (1..=POSITIVE_WORDS.len()).contains(&self.polar_per_class)
            && self.polar_ratio >= 1.0
            && self.emerging_per_class <= EMERGING_POSITIVE_WORDS.len()
            && self.polar_rate >= 0.0
            && self.emerging_rate >= 0.0
            && self.polar_rate + self.emerging_rate <= 1.0
            && self.neutral_per_domain > 0
            && self.min_len <= self.max_len;
        if !ok {
            return Err(Error::InvalidArgument(format!("invalid synthetic config {self:?}")));
        }
        Ok(())
    }

    /// Emerging words with their class.
    pub fn emerging_lexicon(&self) -> Vec<(&'static str, ClassLabel)> {
        EMERGING_POSITIVE_WORDS[..self.emerging_per_class]
            .iter()
            .map(|w| (*w, ClassLabel::Positive))
            .chain(
                EMERGING_NEGATIVE_WORDS[..self.emerging_per_class]
                    .iter()
                    .map(|w| (*w, ClassLabel::Negative)),
            )
            .collect()
    }

    /// Planted words shared by every domain, with their class.
    pub fn lexicon(&self) -> Vec<(&'static str, ClassLabel)> {
        POSITIVE_WORDS[..self.polar_per_class]
            .iter()
            .map(|w| (*w, ClassLabel::Positive))
            .chain(
                NEGATIVE_WORDS[..self.polar_per_class]
                    .iter()
                    .map(|w| (*w, ClassLabel::Negative)),
            )
            .collect()
    }
}

pub fn domain_name(i: usize) -> String {
    format!("synth{i:02}")
}

fn neutral_word(domain: usize, j: usize) -> String {
    format!("d{domain:02}w{j:03}")
}

/// Generates `config.domains` labeled domains from one seed.
pub fn generate(config: &SyntheticConfig, seed: u64) -> Result<Vec<DomainCorpus>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf: Vec<f64> = (1..=config.neutral_per_domain)
        .map(|rank| 1.0 / (rank as f64).powf(config.zipf_exponent))
        .collect();
    let neutral_dist = WeightedIndex::new(&zipf).expect("positive weights");
    let own_prob = config.polar_ratio / (config.polar_ratio + 1.0);
    let n_pos = (config.docs_per_domain as f64 * config.positive_fraction).round() as usize;

    let mut out = Vec::with_capacity(config.domains);
    for d in 0..config.domains {
        let emerging = config.emerging_per_class > 0 && d >= config.emerging_from;
        let emerging_rate = if emerging { config.emerging_rate } else { 0.0 };
        let mut records = Vec::with_capacity(config.docs_per_domain);
        for i in 0..config.docs_per_domain {
            let class = if i < n_pos {
                ClassLabel::Positive
            } else {
                ClassLabel::Negative
            };
            let len = rng.gen_range(config.min_len..=config.max_len);
            let mut tokens = Vec::with_capacity(len);
            for _ in 0..len {
                let u: f64 = rng.gen();
                if u < config.polar_rate + emerging_rate {
                    let side = if rng.gen_bool(own_prob) {
                        class
                    } else {
                        class.opposite()
                    };
                    let (list, n) = match (u < config.polar_rate, side) {
                        (true, ClassLabel::Positive) => (&POSITIVE_WORDS, config.polar_per_class),
                        (true, ClassLabel::Negative) => (&NEGATIVE_WORDS, config.polar_per_class),
                        (false, ClassLabel::Positive) => (&EMERGING_POSITIVE_WORDS, config.emerging_per_class),
                        (false, ClassLabel::Negative) => (&EMERGING_NEGATIVE_WORDS, config.emerging_per_class),
                    };
                    tokens.push(list[rng.gen_range(0..n)].to_owned());
                } else {
                    tokens.push(neutral_word(d, neutral_dist.sample(&mut rng)));
                }
            }
            records.push((class, tokens.join(" ")));
        }
        // interleave classes deterministically
        shuffle(&mut records, &mut rng);
        out.push(DomainCorpus::labeled(domain_name(d), records)?);
    }
    Ok(out)
}

fn shuffle<T, R: Rng>(items: &mut [T], rng: &mut R) {
    use rand::seq::SliceRandom;
    items.shuffle(rng);
}
