//! Property checks shared by the proptest suites and the acceptance runner.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scanb::corpus::{
    extract_contexts, occurrences_under, parse_str, read_ndjson, tokenize, write_ndjson, ContextualizedDocument,
    CorpusConfig, DocTree, NodeId, ParseMode, StructuralContext, TokenizeConfig,
};
use scanb::eval::{
    compute_prf, counts_from_predictions, cross_validate_with_plan, f1_score, make_folds, micro_average,
    ConfusionCounts, Counts, CvOptions,
};
use scanb::model::{
    load_model_from_slice, save_model_to_vec, train, train_with, ContextMapping, ModelConfig, Orientation,
    WeightingStrategy,
};
use scanb::Execution;

use super::{random_corpus, random_test_doc, strings};

type Check = Result<(), TestCaseError>;

/// Generated markup: an element with children, or a run of text.
#[derive(Debug, Clone)]
pub enum Gen {
    Elem(String, Vec<Gen>),
    Text(String),
}

impl Gen {
    pub fn render(&self) -> String {
        match self {
            Gen::Text(t) => t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;"),
            Gen::Elem(name, children) => {
                let inner: String = children.iter().map(Gen::render).collect();
                format!("<{name}>{inner}</{name}>")
            }
        }
    }
}

pub const ELEMENTS: [&str; 6] = ["A", "B", "TITLE", "BODY", "DATELINE", "D"];

fn element_name() -> impl Strategy<Value = String> {
    proptest::sample::select(&ELEMENTS[..]).prop_map(str::to_owned)
}

pub fn markup_tree() -> impl Strategy<Value = Gen> {
    let leaf = prop_oneof![
        "[a-z0-9 &<>\"]{1,12}".prop_map(Gen::Text),
        "[ \n]{1,3}".prop_map(Gen::Text),
        element_name().prop_map(|n| Gen::Elem(n, vec![])),
    ];
    let node = leaf.prop_recursive(4, 40, 4, |inner| {
        (element_name(), prop::collection::vec(inner, 0..4)).prop_map(|(n, c)| Gen::Elem(n, c))
    });
    (element_name(), prop::collection::vec(node, 0..5)).prop_map(|(n, c)| Gen::Elem(n, c))
}

pub fn whitelist_subset() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set(element_name(), 1..4)
}

fn parse(g: &Gen) -> Result<DocTree, TestCaseError> {
    parse_str(&g.render(), ParseMode::Strict).map_err(|e| TestCaseError::fail(format!("{e}: {}", g.render())))
}

fn isomorphic(a: &DocTree, x: NodeId, b: &DocTree, y: NodeId) -> bool {
    let (n, m) = (a.node(x), b.node(y));
    n.element == m.element
        && n.text == m.text
        && n.children.len() == m.children.len()
        && n.children.iter().zip(&m.children).all(|(&c, &d)| isomorphic(a, c, b, d))
}

pub fn parse_serialize_round_trip(g: &Gen) -> Check {
    let tree = parse(g)?;
    prop_assert!(tree.is_valid());
    let again = parse_str(&tree.to_markup(), ParseMode::Strict).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(isomorphic(&tree, tree.root(), &again, again.root()), "{}", tree.to_markup());
    prop_assert_eq!(tree.to_markup(), again.to_markup());
    Ok(())
}

pub fn context_depth_and_prefixes(g: &Gen) -> Check {
    let tree = parse(g)?;
    let paths: BTreeSet<String> = tree
        .nodes()
        .iter()
        .filter(|n| !n.is_text())
        .map(|n| tree.element_path(n.id).join("/"))
        .collect();
    for leaf in tree.nodes().iter().filter(|n| n.text.as_deref().is_some_and(|t| !t.trim().is_empty())) {
        let parent = leaf.parent.expect("text is never the root");
        let ctx = scanb::corpus::leaf_context(&tree, leaf.id).unwrap();
        prop_assert_eq!(ctx.depth(), tree.depth(parent) + 1);
    }
    for (ctx, _) in extract_contexts(&tree) {
        for p in ctx.prefixes() {
            prop_assert!(paths.contains(p), "prefix {} of {} not in tree", p, ctx);
        }
    }
    Ok(())
}

pub fn extract_count_matches_text_leaves(g: &Gen) -> Check {
    let tree = parse(g)?;
    let leaves = tree
        .nodes()
        .iter()
        .filter(|n| n.text.as_deref().is_some_and(|t| !t.trim().is_empty()))
        .count();
    prop_assert_eq!(extract_contexts(&tree).len(), leaves);
    Ok(())
}

pub fn whitelist_filter_commutes(g: &Gen, whitelist: &BTreeSet<String>) -> Check {
    let tree = parse(g)?;
    let tokenizer = TokenizeConfig::raw();
    let restricted = CorpusConfig {
        context_whitelist: Some(whitelist.clone()),
        tokenizer: tokenizer.clone(),
        ..CorpusConfig::default()
    };
    let open = CorpusConfig {
        tokenizer,
        ..CorpusConfig::default()
    };
    let a = occurrences_under(&tree, tree.root(), &restricted);
    let mut b = occurrences_under(&tree, tree.root(), &open);
    b.retain_contexts(|c| whitelist.contains(c.last()));
    prop_assert_eq!(a.total(), b.total());
    prop_assert_eq!(a, b);
    Ok(())
}

pub fn context_text_round_trip(elements: &[String]) -> Check {
    let ctx = StructuralContext::from_elements(elements.iter().map(String::as_str)).unwrap();
    let back: StructuralContext = ctx.to_string().parse().unwrap();
    prop_assert_eq!(&back, &ctx);
    prop_assert_eq!(back.depth(), elements.len());
    prop_assert_eq!(back.elements().collect::<Vec<_>>(), elements.iter().map(String::as_str).collect::<Vec<_>>());
    Ok(())
}

pub fn tokens_are_normalized(text: &str) -> Check {
    for config in [TokenizeConfig::default(), TokenizeConfig::raw()] {
        let tokens = tokenize(text, &config);
        prop_assert_eq!(&tokens, &tokenize(text, &config));
        for t in &tokens {
            prop_assert!(!t.as_str().is_empty());
            prop_assert!(!t.as_str().chars().any(char::is_whitespace));
            prop_assert_eq!(t.as_str().to_lowercase(), t.as_str());
        }
    }
    Ok(())
}

fn corpus(seed: u64) -> (Vec<ContextualizedDocument>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cats = ["alpha", "beta", "gamma"];
    let n = rng.random_range(2..30);
    (random_corpus(&mut rng, n, &cats), strings(&cats))
}

fn full_path() -> ModelConfig {
    ModelConfig {
        mapping: ContextMapping::FullPath,
        strategy: WeightingStrategy::Unity,
        alpha: 1.0,
    }
}

fn configs() -> Vec<ModelConfig> {
    vec![
        ModelConfig::flat_nb(),
        full_path(),
        ModelConfig::scanb(Orientation::AsPrinted),
        ModelConfig::scanb(Orientation::Inverted),
    ]
}

pub fn smoothed_distributions_normalize(seed: u64, alpha: f64) -> Check {
    let (docs, cats) = corpus(seed);
    let model = train(&docs, &cats, &ModelConfig { alpha, ..full_path() }).unwrap();
    let unseen = StructuralContext::parse("NEVER/SEEN").unwrap();
    for cat in &cats {
        let mut contexts: Vec<StructuralContext> = model.trained_contexts(cat).into_iter().cloned().collect();
        contexts.push(unseen.clone());
        for ctx in &contexts {
            let sum: f64 = model
                .vocabulary()
                .iter()
                .map(|t| model.log_prob(t.as_str(), ctx, cat).unwrap().exp())
                .sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "{} {}: {}", cat, ctx, sum);
        }
    }
    Ok(())
}

pub fn priors_sum_to_one(seed: u64) -> Check {
    let (docs, cats) = corpus(seed);
    let model = train(&docs, &cats, &ModelConfig::flat_nb()).unwrap();
    let sum: f64 = cats.iter().map(|c| model.prior(c).unwrap()).sum();
    prop_assert!((sum - 1.0).abs() <= 1e-12, "{}", sum);
    Ok(())
}

pub fn train_stats_are_consistent(seed: u64) -> Check {
    let (docs, cats) = corpus(seed);
    let model = train(&docs, &cats, &full_path()).unwrap();
    let stats = model.stats();
    let v = stats.vocabulary.len();
    for cat in stats.categories.values() {
        for s in cat.contexts.values() {
            prop_assert_eq!(s.total, s.counts.values().sum::<u64>());
            prop_assert!(s.vocab_size() <= v);
            prop_assert!(s.counts.values().all(|&n| n > 0));
        }
    }
    for s in stats.pooled.values() {
        prop_assert_eq!(s.total, s.counts.values().sum::<u64>());
    }
    Ok(())
}

/// Equal class sizes, one label each.
fn balanced(seed: u64) -> (Vec<ContextualizedDocument>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cats = ["alpha", "beta", "gamma"];
    let per = rng.random_range(1..6);
    let mut docs = random_corpus(&mut rng, per * cats.len(), &cats);
    for (i, d) in docs.iter_mut().enumerate() {
        d.labels = BTreeSet::from([cats[i % cats.len()].to_owned()]);
    }
    (docs, strings(&cats))
}

pub fn argmax_invariant_under_weight_scaling(seed: u64, exponent: i32) -> Check {
    let (docs, cats) = balanced(seed);
    let lambda = 2f64.powi(exponent);
    let base = ModelConfig {
        strategy: WeightingStrategy::Fixed {
            weights: BTreeMap::new(),
        },
        ..full_path()
    };
    let scaled = ModelConfig {
        strategy: WeightingStrategy::Fixed {
            weights: BTreeMap::from([(StructuralContext::parse("R").unwrap(), lambda)]),
        },
        ..full_path()
    };
    let a = train(&docs, &cats, &base).unwrap();
    let b = train(&docs, &cats, &scaled).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for _ in 0..5 {
        let mut probe = random_test_doc(&mut rng);
        probe.occurrences.retain_contexts(|c| c.as_str().starts_with("R/"));
        let sa = a.score(&probe);
        let sb = b.score(&probe);
        let best = sa.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let chosen = sa.get(sb.best_category()).unwrap();
        prop_assert!(best - chosen <= 1e-9 * best.abs().max(1.0), "{} vs {}", sa.best_category(), sb.best_category());
    }
    Ok(())
}

pub fn added_occurrence_changes_one_term(seed: u64, term: u8, ctx_index: usize) -> Check {
    let (docs, cats) = corpus(seed);
    let contexts = ["R/TEXT/TITLE", "R/TEXT/BODY", "R/UNSEEN"];
    let ctx = contexts[ctx_index % contexts.len()];
    let term = format!("t{}", term % 15);
    let weights = BTreeMap::from([
        (StructuralContext::parse("R/TEXT").unwrap(), 1.5),
        (StructuralContext::parse("R/TEXT/BODY").unwrap(), 0.5),
    ]);
    for config in [
        full_path(),
        ModelConfig {
            strategy: WeightingStrategy::Fixed { weights: weights.clone() },
            ..full_path()
        },
    ] {
        let model = train(&docs, &cats, &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let probe = random_test_doc(&mut rng);
        let before = model.score(&probe);
        let after = model.score(&probe.clone().with(ctx, &term, 1));
        let n = StructuralContext::parse(ctx).unwrap();
        // A category with no training documents scores -inf either way.
        for cat in cats.iter().filter(|c| model.prior(c).unwrap() > 0.0) {
            let w = model.node_weight(&probe, &n, cat).unwrap();
            let lp = model.log_prob(&term, &n, cat).unwrap();
            let delta = after.get(cat).unwrap() - before.get(cat).unwrap();
            prop_assert!(delta <= 1e-12, "{}: delta {} w {} lp {} before {:?} after {:?}", cat, delta, w, lp, before.scores, after.scores);
            prop_assert!((delta - w * lp).abs() <= 1e-9, "{}: {} vs {}", cat, delta, w * lp);
        }
    }
    Ok(())
}

pub fn training_and_scoring_are_deterministic(seed: u64) -> Check {
    let (docs, cats) = corpus(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = random_test_doc(&mut rng);
    for config in configs() {
        let a = train_with(&docs, &cats, &config, Execution::Sequential).unwrap();
        let b = train_with(&docs, &cats, &config, Execution::Parallel).unwrap();
        let c = train_with(&docs, &cats, &config, Execution::Parallel).unwrap();
        let bits = |m: &scanb::model::ScanbModel| m.score(&probe).scores.iter().map(|s| s.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&b));
        prop_assert_eq!(bits(&b), bits(&c));
        prop_assert_eq!(a.stats(), b.stats());
    }
    Ok(())
}

pub fn model_file_replays_bitwise(seed: u64) -> Check {
    let (docs, cats) = corpus(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = random_test_doc(&mut rng);
    for config in configs() {
        let model = train(&docs, &cats, &config).unwrap();
        let bytes = save_model_to_vec(&model);
        let loaded = load_model_from_slice(&bytes).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(save_model_to_vec(&loaded), bytes);
        let a: Vec<u64> = model.score(&probe).scores.iter().map(|s| s.to_bits()).collect();
        let b: Vec<u64> = loaded.score(&probe).scores.iter().map(|s| s.to_bits()).collect();
        prop_assert_eq!(a, b);
        prop_assert_eq!(
            model.classify_multilabel(&probe, &Default::default()),
            loaded.classify_multilabel(&probe, &Default::default())
        );
    }
    Ok(())
}

pub fn corpus_dump_round_trips(seed: u64) -> Check {
    let (docs, _) = corpus(seed);
    let mut buf = Vec::new();
    write_ndjson(&docs, &mut buf).unwrap();
    let back = read_ndjson(&buf[..]).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(back, docs);
    Ok(())
}

pub fn counts_strategy() -> impl Strategy<Value = Vec<(u64, u64, u64)>> {
    prop::collection::vec((0u64..500, 0u64..500, 0u64..500), 1..12)
}

fn confusion(rows: &[(u64, u64, u64)]) -> ConfusionCounts {
    ConfusionCounts::from_map(
        rows.iter()
            .enumerate()
            .map(|(i, &(tp, fp, fn_))| (format!("c{i:02}"), Counts::new(tp, fp, fn_)))
            .collect(),
    )
}

pub fn measures_are_bounded(rows: &[(u64, u64, u64)]) -> Check {
    let c = confusion(rows);
    let mut all: Vec<_> = (0..rows.len()).map(|i| compute_prf(&c, &format!("c{i:02}"))).collect();
    all.push(micro_average(&c));
    for m in all {
        for v in [m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if m.precision > 0.0 && m.recall > 0.0 {
            prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-15);
            prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-15);
        }
    }
    Ok(())
}

pub fn micro_follows_summed_counts(rows: &[(u64, u64, u64)]) -> Check {
    let c = confusion(rows);
    let (tp, fp, fn_) = rows
        .iter()
        .fold((0u64, 0u64, 0u64), |(a, b, d), &(x, y, z)| (a + x, b + y, d + z));
    let m = micro_average(&c);
    let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    prop_assert_eq!(m.precision, p);
    prop_assert_eq!(m.recall, r);
    prop_assert_eq!(m.f1, f1_score(p, r));
    Ok(())
}

pub fn folds_partition_corpus(n: usize, k: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = random_corpus(&mut rng, n, &["a", "b", "c", "d"]);
    let plan = make_folds(&docs, k, seed).unwrap();
    prop_assert_eq!(plan.folds.len(), k);
    let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
    prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    let all: BTreeSet<&String> = plan.folds.iter().flatten().collect();
    prop_assert_eq!(all.len(), n);
    prop_assert_eq!(sizes.iter().sum::<usize>(), n);
    for d in &docs {
        prop_assert!(all.contains(&d.doc_id));
    }
    Ok(())
}

fn cv_corpus(seed: u64) -> (Vec<ContextualizedDocument>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cats = ["alpha", "beta", "gamma"];
    let n = rng.random_range(12..40);
    (random_corpus(&mut rng, n, &cats), strings(&cats))
}

pub fn pooled_counts_match_prediction_log(seed: u64) -> Check {
    let (docs, cats) = cv_corpus(seed);
    let plan = make_folds(&docs, 4, seed).unwrap();
    let opts = CvOptions {
        k: 4,
        seed,
        ..CvOptions::default()
    };
    let out = cross_validate_with_plan(&docs, &cats, &ModelConfig::scanb(Orientation::AsPrinted), &plan, &opts).unwrap();
    let replayed = counts_from_predictions(&cats, &out.predictions);
    prop_assert_eq!(&replayed, &out.report.counts());
    prop_assert_eq!(micro_average(&replayed), out.report.micro);
    let mut per_fold = ConfusionCounts::new(&cats);
    for f in &out.per_fold {
        per_fold.merge(f);
    }
    prop_assert_eq!(&per_fold, &replayed);
    for cat in &cats {
        let truly = docs.iter().filter(|d| d.labels.contains(cat)).count() as u64;
        let c = replayed.get(cat);
        prop_assert_eq!(c.tp + c.fn_, truly);
    }
    Ok(())
}

pub fn document_order_does_not_matter(seed: u64, shuffle_seed: u64) -> Check {
    let (docs, cats) = cv_corpus(seed);
    let plan = make_folds(&docs, 3, seed).unwrap();
    let mut shuffled = docs.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
    let opts = CvOptions::default();
    for config in configs() {
        let a = cross_validate_with_plan(&docs, &cats, &config, &plan, &opts).unwrap();
        let b = cross_validate_with_plan(&shuffled, &cats, &config, &plan, &opts).unwrap();
        prop_assert_eq!(&a.report, &b.report);
    }
    prop_assert_eq!(make_folds(&shuffled, 3, seed).unwrap(), plan);
    Ok(())
}

pub fn evaluation_replays_byte_identical(seed: u64) -> Check {
    let (docs, cats) = cv_corpus(seed);
    let plan = make_folds(&docs, 3, seed).unwrap();
    let run = |execution| {
        let opts = CvOptions {
            execution,
            ..CvOptions::default()
        };
        let out = cross_validate_with_plan(&docs, &cats, &ModelConfig::scanb(Orientation::Inverted), &plan, &opts).unwrap();
        (serde_json::to_vec(&out.report).unwrap(), serde_json::to_vec(&out.predictions).unwrap())
    };
    let first = run(Execution::Parallel);
    prop_assert_eq!(&first, &run(Execution::Parallel));
    prop_assert_eq!(&first, &run(Execution::Sequential));
    Ok(())
}

pub fn unit_weights_equal_splitting_oracle_under_cv(seed: u64) -> Check {
    let (docs, cats) = cv_corpus(seed);
    let plan = make_folds(&docs, 3, seed).unwrap();
    let assignment = plan.assignments();
    for fold in 0..3 {
        let train_docs: Vec<_> = docs.iter().filter(|d| assignment[d.doc_id.as_str()] != fold).cloned().collect();
        let raw = super::raw_all(&train_docs);
        let model = train(&train_docs, &cats, &full_path()).unwrap();
        for d in docs.iter().filter(|d| assignment[d.doc_id.as_str()] == fold) {
            let expected = super::splitting_nb_scores(&raw, &cats, 1.0, &super::RawDoc::of(d));
            prop_assert!(super::max_abs_diff(&model.score(d).scores, &expected) <= 1e-9);
        }
    }
    Ok(())
}
