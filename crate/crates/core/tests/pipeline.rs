mod common;

use lifelong_sentiment::engine::run_sequence;
use lifelong_sentiment::evaluation::{
    compare_systems, macro_f1, nbs_baseline, nbt_baseline, percentage_sweep, DEFAULT_FOLDS, DEFAULT_SEED,
    SYSTEM_SOURCE_ONLY,
};
use lifelong_sentiment::synthetic::{generate, SyntheticConfig};
use lifelong_sentiment::{ClassLabel, Document, DomainCorpus, EngineConfig, Error, LifelongState, NbModel, WordSet};

fn synthetic(seed: u64) -> Vec<DomainCorpus> {
    generate(&SyntheticConfig::default(), seed).unwrap()
}

fn small(domains: usize, docs: usize, seed: u64) -> Vec<DomainCorpus> {
    let cfg = SyntheticConfig {
        domains,
        docs_per_domain: docs,
        ..SyntheticConfig::default()
    };
    generate(&cfg, seed).unwrap()
}

fn accuracy(pred: &[ClassLabel], gold: &[ClassLabel]) -> f64 {
    pred.iter().zip(gold).filter(|(a, b)| a == b).count() as f64 / gold.len() as f64
}

#[test]
fn initial_learning_credits_planted_words_in_every_domain() {
    let cfg = SyntheticConfig::default();
    let domains = generate(&cfg, 11).unwrap();
    let state = LifelongState::initial_learn(&domains[..3], EngineConfig::default()).unwrap();
    for (w, c) in cfg.lexicon() {
        let entry = state.kb().get(w, c).unwrap_or_else(|| panic!("{w} missing"));
        assert_eq!(entry.domains_seen.len(), 3, "{w}");
    }
}

#[test]
fn one_initial_domain_is_rejected() {
    let domains = small(1, 50, 1);
    let err = LifelongState::initial_learn(&domains, EngineConfig::default()).unwrap_err();
    assert!(matches!(err, Error::InsufficientDomains { got: 1, need: 2 }));
    assert!(err.to_string().contains("insufficient initial domains"));
}

#[test]
fn doubled_domain_matches_recomputed_likelihoods() {
    let d = common::tiny_corpus();
    let twin = DomainCorpus::new("twin", d.documents().to_vec(), d.labels().map(<[_]>::to_vec)).unwrap();
    let config = EngineConfig {
        min_avg_freq: 0.0,
        ..EngineConfig::default()
    };
    let state = LifelongState::initial_learn(&[d, twin], config).unwrap();
    let m = state.model();
    // counts double, |V| stays 3: (1 + 2n) / (3 + 2T)
    let expected = [
        ("good", ClassLabel::Positive, 5.0 / 9.0),
        ("movie", ClassLabel::Positive, 3.0 / 9.0),
        ("bad", ClassLabel::Positive, 1.0 / 9.0),
        ("good", ClassLabel::Negative, 1.0 / 7.0),
        ("movie", ClassLabel::Negative, 3.0 / 7.0),
        ("bad", ClassLabel::Negative, 3.0 / 7.0),
    ];
    for (w, c, p) in expected {
        assert!((m.word_likelihood(w, c) - p).abs() < 1e-12, "{w} {c}");
    }
    assert_eq!(m.priors(), [0.5, 0.5]);
}

#[test]
fn empty_sequence_returns_initial_state() {
    let domains = small(3, 100, 2);
    let out = run_sequence(&domains, &[], EngineConfig::default()).unwrap();
    let initial = LifelongState::initial_learn(&domains, EngineConfig::default()).unwrap();
    assert!(out.report.rows().is_empty());
    assert!(out.pseudo_labels.is_empty());
    assert_eq!(out.state.model(), initial.model());
    assert_eq!(out.state.kb(), initial.kb());
}

#[test]
fn self_study_beats_source_only_with_accurate_pseudo_labels() {
    let config = EngineConfig::default();
    for seed in 0..5 {
        let domains = synthetic(seed);
        let (sources, targets) = domains.split_at(3);
        let out = run_sequence(sources, targets, config.clone()).unwrap();
        let accs: Vec<f64> = out
            .pseudo_labels
            .iter()
            .zip(targets)
            .map(|((name, pred), d)| {
                assert_eq!(name, d.name());
                accuracy(pred, d.labels().unwrap())
            })
            .collect();
        let mean_acc = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!(mean_acc > 0.9, "seed {seed}: pseudo-label accuracy {accs:?}");

        let lifelong: f64 = targets
            .iter()
            .map(|d| {
                out.report
                    .score(d.name(), lifelong_sentiment::evaluation::SYSTEM_LIFELONG)
                    .unwrap()
            })
            .sum::<f64>();
        let source_only: f64 = targets.iter().map(|d| nbs_baseline(sources, d, &config).unwrap()).sum();
        assert!(lifelong > source_only, "seed {seed}");
    }
}

#[test]
fn order_of_unlabeled_domains_matters_but_both_beat_source_only() {
    let config = EngineConfig::default();
    let domains = synthetic(3);
    let (sources, targets) = domains.split_at(3);
    let reversed: Vec<DomainCorpus> = targets.iter().rev().cloned().collect();
    let forward = run_sequence(sources, targets, config.clone()).unwrap();
    let backward = run_sequence(sources, &reversed, config.clone()).unwrap();
    let avg = |r: &lifelong_sentiment::EvalReport| r.average(lifelong_sentiment::evaluation::SYSTEM_LIFELONG).unwrap();
    let nbs = targets
        .iter()
        .map(|d| nbs_baseline(sources, d, &config).unwrap())
        .sum::<f64>()
        / targets.len() as f64;
    assert!(avg(&forward.report) > nbs);
    assert!(avg(&backward.report) > nbs);
    assert_ne!(forward.report.to_tsv(), backward.report.to_tsv());
}

#[test]
fn pseudo_labels_use_only_kb_words() {
    let domains = small(4, 200, 5);
    let state = LifelongState::initial_learn(&domains[..3], EngineConfig::default()).unwrap();
    let kb_words: WordSet = state.kb().vocabulary(None);
    let target = domains[3].without_labels();
    let stripped: Vec<Document> = target
        .documents()
        .iter()
        .map(|d| {
            let kept: Vec<&str> = d
                .tokens()
                .iter()
                .filter(|t| kb_words.contains(*t))
                .map(String::as_str)
                .collect();
            Document::new(kept.join(" "))
        })
        .collect();
    let stripped = DomainCorpus::new(target.name(), stripped, None).unwrap();
    let mut a = state.clone();
    let b = state;
    let full = a.self_study(&target).unwrap();
    let only_kb = b.predict(&stripped);
    assert_eq!(full.pseudo_labels, only_kb);
}

#[test]
fn vocabulary_is_union_of_consumed_domains() {
    let domains = small(5, 150, 6);
    let mut state = LifelongState::initial_learn(&domains[..3], EngineConfig::default()).unwrap();
    let mut union: WordSet = WordSet::new();
    let extend =
        |d: &DomainCorpus, u: &mut WordSet| u.extend(d.documents().iter().flat_map(|x| x.tokens().iter().cloned()));
    for d in &domains[..3] {
        extend(d, &mut union);
    }
    assert_eq!(state.model().vocabulary_set(), union);
    for d in &domains[3..] {
        state.self_study(&d.without_labels()).unwrap();
        extend(d, &mut union);
        assert_eq!(state.model().vocabulary_set(), union);
        assert_eq!(state.kb().update_log().iter().filter(|(n, _)| n == d.name()).count(), 1);
    }
    assert_eq!(state.consumed().len(), 5);
}

#[test]
fn repeated_domain_is_rejected_without_side_effects() {
    let domains = small(4, 100, 7);
    let mut state = LifelongState::initial_learn(&domains[..3], EngineConfig::default()).unwrap();
    state.self_study(&domains[3].without_labels()).unwrap();
    let before = state.clone();
    let err = state.self_study(&domains[3].without_labels()).unwrap_err();
    assert!(matches!(err, Error::DuplicateDomain(_)));
    assert_eq!(state.model(), before.model());
    assert_eq!(state.kb(), before.kb());
}

#[test]
fn copy_of_initial_domain_gets_training_set_predictions() {
    let domains = small(3, 150, 8);
    let mut state = LifelongState::initial_learn(&domains, EngineConfig::default()).unwrap();
    let copy = DomainCorpus::new("copy", domains[0].documents().to_vec(), None).unwrap();
    let expected = state.predict(&copy);
    let out = state.self_study(&copy).unwrap();
    assert_eq!(out.pseudo_labels, expected);
    assert_eq!(state.consumed().len(), 4);
}

#[test]
fn single_class_pseudo_labels_still_update() {
    let domains = small(3, 100, 9);
    let mut state = LifelongState::initial_learn(&domains, EngineConfig::default()).unwrap();
    let glowing = DomainCorpus::unlabeled("glowing", vec!["great great excellent love"; 20]).unwrap();
    let out = state.self_study(&glowing).unwrap();
    assert!(out.single_class);
    assert!(out.pseudo_labels.iter().all(|&l| l == ClassLabel::Positive));
    assert!(state.kb().has_domain("glowing"));
}

#[test]
fn separable_domain_scores_high_in_domain() {
    let cfg = SyntheticConfig {
        domains: 1,
        docs_per_domain: 300,
        polar_ratio: 50.0,
        polar_rate: 0.3,
        emerging_per_class: 0,
        ..SyntheticConfig::default()
    };
    let d = &generate(&cfg, 4).unwrap()[0];
    let f1 = nbt_baseline(d, DEFAULT_FOLDS, DEFAULT_SEED, &EngineConfig::default()).unwrap();
    assert!(f1 > 0.95, "{f1}");
}

#[test]
fn in_domain_baseline_runs_with_singleton_folds() {
    let records: Vec<(ClassLabel, String)> = (0..10)
        .map(|i| {
            let c = if i % 2 == 0 {
                ClassLabel::Positive
            } else {
                ClassLabel::Negative
            };
            (c, format!("{} filler{i}", if i % 2 == 0 { "nice" } else { "poor" }))
        })
        .collect();
    let d = DomainCorpus::labeled("tiny5", records).unwrap();
    let f1 = nbt_baseline(&d, 5, DEFAULT_SEED, &EngineConfig::default()).unwrap();
    assert!((0.0..=1.0).contains(&f1));
}

#[test]
fn source_only_on_a_source_equals_training_fit() {
    let domains = small(2, 100, 10);
    let config = EngineConfig::default();
    let model = NbModel::fit_corpus(&domains[0], 1.0).unwrap();
    let pred = model.predict_all(domains[0].documents(), None);
    let expected = macro_f1(&pred, domains[0].labels().unwrap()).unwrap();
    let got = nbs_baseline(&domains[..1], &domains[0], &config).unwrap();
    assert_eq!(got, expected);
}

#[test]
fn source_only_trails_in_domain_on_shifted_targets() {
    let config = EngineConfig::default();
    for seed in 0..5 {
        let domains = synthetic(seed);
        let (sources, targets) = domains.split_at(3);
        for t in targets {
            let s = nbs_baseline(sources, t, &config).unwrap();
            let n = nbt_baseline(t, DEFAULT_FOLDS, DEFAULT_SEED, &config).unwrap();
            assert!(s < n, "seed {seed} {}: {s} vs {n}", t.name());
        }
    }
}

#[test]
fn full_percentage_equals_in_domain_baseline() {
    let domains = small(3, 200, 12);
    let config = EngineConfig::default();
    let table = percentage_sweep(&domains, &[100.0, 50.0], DEFAULT_FOLDS, DEFAULT_SEED, &config).unwrap();
    let full = table.column(100.0).unwrap();
    for (d, score) in domains.iter().zip(full) {
        assert_eq!(score, nbt_baseline(d, DEFAULT_FOLDS, DEFAULT_SEED, &config).unwrap());
    }
}

#[test]
fn comparison_report_has_three_systems_per_target() {
    let domains = small(5, 120, 13);
    let report = compare_systems(
        &domains[..3],
        &domains[3..],
        DEFAULT_FOLDS,
        DEFAULT_SEED,
        &EngineConfig::default(),
    )
    .unwrap();
    assert_eq!(report.domains().len(), 2);
    assert_eq!(report.systems().len(), 3);
    assert_eq!(report.rows().len(), 6);
    assert!(report.score(domains[3].name(), SYSTEM_SOURCE_ONLY).is_some());
    let reparsed = lifelong_sentiment::EvalReport::from_tsv(&report.to_tsv(), "memory").unwrap();
    assert_eq!(reparsed.to_tsv(), report.to_tsv());
}

#[test]
fn macro_f1_fixtures() {
    let p = ClassLabel::Positive;
    let n = ClassLabel::Negative;
    assert!((macro_f1(&[p, n, n, n], &[p, p, n, n]).unwrap() - 11.0 / 15.0).abs() < 1e-12);
    assert_eq!(macro_f1(&[p, n], &[p, n]).unwrap(), 1.0);
    // all positive on balanced gold: F1(+) = 2/3, F1(-) = 0
    assert!((macro_f1(&[p, p, p, p], &[p, p, n, n]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!(macro_f1(&[p], &[p, n]).is_err());
    assert!(macro_f1(&[], &[]).is_err());
}
