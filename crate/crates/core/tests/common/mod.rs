//! Test support: independent scoring oracles and synthetic corpora.
//!
//! The oracles deliberately avoid the crate's model types. They take plain
//! `(doc, context, term, count)` data, recount everything from scratch on
//! every call, and evaluate the score formula with nested loops.

#![allow(dead_code)]

pub mod props;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scanb::corpus::ContextualizedDocument;

/// Plain-data view of a document: labels and `(context, term, count)` rows.
#[derive(Debug, Clone)]
pub struct RawDoc {
    pub labels: Vec<String>,
    pub rows: Vec<(String, String, u32)>,
}

impl RawDoc {
    pub fn of(doc: &ContextualizedDocument) -> Self {
        RawDoc {
            labels: doc.labels.iter().cloned().collect(),
            rows: doc
                .occurrences
                .triples()
                .map(|(c, t, n)| (c.to_string(), t.to_string(), n))
                .collect(),
        }
    }
}

pub fn raw_all(docs: &[ContextualizedDocument]) -> Vec<RawDoc> {
    docs.iter().map(RawDoc::of).collect()
}

/// Node weight used by [`brute_force_scores`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleWeight {
    One,
    CoverageOverLength,
    LengthOverCoverage,
}

/// Flat multinomial naive Bayes: every occurrence pooled into one bag.
pub fn flat_nb_scores(train: &[RawDoc], categories: &[String], alpha: f64, test: &RawDoc) -> Vec<f64> {
    let flatten = |d: &RawDoc| RawDoc {
        labels: d.labels.clone(),
        rows: d.rows.iter().map(|(_, t, n)| ("*".to_owned(), t.clone(), *n)).collect(),
    };
    let train: Vec<RawDoc> = train.iter().map(flatten).collect();
    splitting_nb_scores(&train, categories, alpha, &flatten(test))
}

/// One smoothed multinomial per (category, context), unit weights.
pub fn splitting_nb_scores(train: &[RawDoc], categories: &[String], alpha: f64, test: &RawDoc) -> Vec<f64> {
    brute_force_scores(train, categories, alpha, OracleWeight::One, |_| true, test)
}

/// Direct loop evaluation of
/// `log P(ω) + Σ_n w(n,ω) Σ_v count(v,n) log P(v | n, ω)`
/// over the contexts accepted by `keep`.
pub fn brute_force_scores(
    train: &[RawDoc],
    categories: &[String],
    alpha: f64,
    weight: OracleWeight,
    keep: impl Fn(&str) -> bool,
    test: &RawDoc,
) -> Vec<f64> {
    let mut vocabulary = BTreeSet::new();
    for d in train {
        for (c, t, _) in &d.rows {
            if keep(c) {
                vocabulary.insert(t.as_str());
            }
        }
    }
    let v = vocabulary.len().max(1) as f64;
    let label_total: usize = train
        .iter()
        .map(|d| d.labels.iter().filter(|l| categories.contains(l)).count())
        .sum();

    let mut test_bags: BTreeMap<&str, Vec<(&str, u32)>> = BTreeMap::new();
    for (c, t, n) in &test.rows {
        if keep(c) {
            test_bags.entry(c.as_str()).or_default().push((t.as_str(), *n));
        }
    }

    let mut sorted: Vec<&String> = categories.iter().collect();
    sorted.sort();
    sorted.dedup();
    sorted
        .into_iter()
        .map(|cat| {
            let members: Vec<&RawDoc> = train.iter().filter(|d| d.labels.contains(cat)).collect();
            let mut score = (members.len() as f64 / label_total as f64).ln();
            for (ctx, bag) in &test_bags {
                let mut total = 0u64;
                let mut distinct = BTreeSet::new();
                for d in &members {
                    for (c, t, n) in &d.rows {
                        if c == ctx {
                            total += u64::from(*n);
                            distinct.insert(t.as_str());
                        }
                    }
                }
                let doc_len: u64 = bag.iter().map(|(_, n)| u64::from(*n)).sum();
                let w = match weight {
                    OracleWeight::One => 1.0,
                    _ if doc_len == 0 || distinct.is_empty() => 1e-6,
                    OracleWeight::CoverageOverLength => distinct.len() as f64 / doc_len as f64,
                    OracleWeight::LengthOverCoverage => doc_len as f64 / distinct.len() as f64,
                };
                let mut loglik = 0.0;
                for (term, n) in bag {
                    let mut count = 0u64;
                    for d in &members {
                        for (c, t, m) in &d.rows {
                            if c == ctx && t == term {
                                count += u64::from(*m);
                            }
                        }
                    }
                    let p = (count as f64 + alpha) / (total as f64 + alpha * v);
                    loglik += f64::from(*n) * p.ln();
                }
                score += w * loglik;
            }
            score
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

/// A small random labeled corpus over a handful of contexts and terms.
pub fn random_corpus(rng: &mut impl Rng, docs: usize, categories: &[&str]) -> Vec<ContextualizedDocument> {
    const CONTEXTS: [&str; 4] = ["R/TEXT/TITLE", "R/TEXT/BODY", "R/TEXT/DATELINE", "R/TOPICS/D"];
    let terms: Vec<String> = (0..12).map(|i| format!("t{i}")).collect();
    (0..docs)
        .map(|i| {
            let mut labels = vec![categories[rng.random_range(0..categories.len())]];
            if rng.random_bool(0.2) {
                labels.push(categories[rng.random_range(0..categories.len())]);
            }
            let mut doc = ContextualizedDocument::new(format!("d{i:04}"), labels);
            for _ in 0..rng.random_range(1..8) {
                let ctx = CONTEXTS[rng.random_range(0..CONTEXTS.len())];
                let term = &terms[rng.random_range(0..terms.len())];
                doc = doc.with(ctx, term, rng.random_range(1..4));
            }
            doc
        })
        .collect()
}

/// A document that may use contexts and terms absent from training.
pub fn random_test_doc(rng: &mut impl Rng) -> ContextualizedDocument {
    let mut doc = ContextualizedDocument::new("probe", ["?"]);
    for _ in 0..rng.random_range(1..10) {
        let ctx = ["R/TEXT/TITLE", "R/TEXT/BODY", "R/UNSEEN"][rng.random_range(0..3)];
        let term = format!("t{}", rng.random_range(0..15));
        doc = doc.with(ctx, &term, rng.random_range(1..4));
    }
    doc
}

/// One generated Reuters-style article.
#[derive(Debug, Clone)]
pub struct SyntheticArticle {
    pub new_id: usize,
    pub topics: Vec<String>,
    pub title: String,
    pub dateline: String,
    pub body: String,
}

/// Words strongly tied to each of the ten categories.
pub fn category_words(category: &str) -> &'static [&'static str] {
    match category {
        "acq" => &["acquire", "merger", "stake", "takeover", "shareholders"],
        "corn" => &["corn", "maize", "bushels", "harvest", "feedgrain"],
        "crude" => &["crude", "barrels", "opec", "refinery", "petroleum"],
        "earn" => &["profit", "dividend", "quarter", "revenues", "loss"],
        "grain" => &["grain", "tonnes", "harvest", "export", "cereals"],
        "interest" => &["rates", "discount", "lending", "prime", "basis"],
        "money-fx" => &["dollar", "currency", "exchange", "yen", "intervention"],
        "ship" => &["vessel", "port", "tanker", "cargo", "shipping"],
        "trade" => &["tariffs", "deficit", "imports", "surplus", "protectionism"],
        "wheat" => &["wheat", "durum", "flour", "winter", "tonnes"],
        _ => &["miscellaneous"],
    }
}

const FILLER: [&str; 16] = [
    "company", "market", "week", "government", "officials", "reported", "statement", "year", "month",
    "analysts", "expected", "industry", "sources", "told", "agency", "plans",
];
const PLACES: [&str; 6] = ["NEW YORK", "LONDON", "TOKYO", "CHICAGO", "OTTAWA", "PARIS"];

/// Generates `n` articles labeled from `categories` (1 or 2 topics each).
pub fn synthetic_articles(n: usize, categories: &[&str], seed: u64) -> Vec<SyntheticArticle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let first = categories[rng.random_range(0..categories.len())];
            let mut topics = vec![first.to_owned()];
            if rng.random_bool(0.15) {
                let second = categories[rng.random_range(0..categories.len())];
                if second != first {
                    topics.push(second.to_owned());
                }
            }
            let mut words = |count: usize, signal: f64| {
                (0..count)
                    .map(|_| {
                        if rng.random_bool(signal) {
                            let t = &topics[rng.random_range(0..topics.len())];
                            let w = category_words(t);
                            w[rng.random_range(0..w.len())]
                        } else {
                            FILLER[rng.random_range(0..FILLER.len())]
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let title = words(5, 0.6).to_uppercase();
            let body = words(40, 0.25);
            let place = PLACES[rng.random_range(0..PLACES.len())];
            SyntheticArticle {
                new_id: i + 1,
                topics,
                title,
                dateline: format!("{place}, March {} -", rng.random_range(1..29)),
                body,
            }
        })
        .collect()
}

/// Renders articles as one `.sgm` file in the Reuters-21578 layout.
pub fn render_sgm(articles: &[SyntheticArticle]) -> String {
    let mut out = String::from("<!DOCTYPE lewis SYSTEM \"lewis.dtd\">\n");
    for a in articles {
        let split = if a.new_id % 3 == 0 { "TEST" } else { "TRAIN" };
        let _ = writeln!(
            out,
            "<REUTERS TOPICS=\"YES\" LEWISSPLIT=\"{split}\" CGISPLIT=\"TRAINING-SET\" OLDID=\"{}\" NEWID=\"{}\">",
            a.new_id + 5000,
            a.new_id
        );
        let _ = writeln!(out, "<DATE>26-FEB-1987 15:01:01.79</DATE>");
        out.push_str("<TOPICS>");
        for t in &a.topics {
            let _ = write!(out, "<D>{t}</D>");
        }
        out.push_str("</TOPICS>\n<PLACES><D>usa</D></PLACES>\n<PEOPLE></PEOPLE>\n<UNKNOWN> \n&#5;&#5;&#5;C T\n&#22;&#22;&#1;f0704&#31;reute\n</UNKNOWN>\n");
        let _ = writeln!(
            out,
            "<TEXT>&#2;\n<TITLE>{}</TITLE>\n<DATELINE>    {} </DATELINE><BODY>{}\n Reuter\n&#3;</BODY></TEXT>\n</REUTERS>",
            a.title, a.dateline, a.body
        );
    }
    out
}

/// Writes `files` synthetic `.sgm` files into `dir`; returns all articles.
pub fn write_synthetic_corpus(dir: &std::path::Path, files: usize, per_file: usize, seed: u64) -> Vec<SyntheticArticle> {
    let cats = scanb::corpus::REUTERS_TEN;
    let mut all = synthetic_articles(files * per_file, &cats, seed);
    for (f, chunk) in all.chunks(per_file).enumerate() {
        std::fs::write(dir.join(format!("reut2-{f:03}.sgm")), render_sgm(chunk)).unwrap();
    }
    all.truncate(files * per_file);
    all
}

/// Label sets keyed by NEWID.
pub fn labels_by_id(articles: &[SyntheticArticle]) -> HashMap<String, BTreeSet<String>> {
    articles
        .iter()
        .map(|a| (a.new_id.to_string(), a.topics.iter().cloned().collect()))
        .collect()
}

pub fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn model_scores(model: &scanb::model::ScanbModel, doc: &ContextualizedDocument) -> Vec<f64> {
    model.score(doc).scores
}

/// Trains flat and full-path unit-weight models on `corpora` random corpora
/// and compares their scores on random probes against the oracles.
/// Returns the largest deviation seen for each reduction.
pub fn reduction_deviation(corpora: usize, seed: u64) -> (f64, f64) {
    use scanb::model::{train, ContextMapping, ModelConfig, WeightingStrategy};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cats_str = ["alpha", "beta", "gamma"];
    let cats = strings(&cats_str);
    let flat = ModelConfig::flat_nb();
    let full = ModelConfig {
        mapping: ContextMapping::FullPath,
        strategy: WeightingStrategy::Unity,
        alpha: 1.0,
    };
    let (mut worst_flat, mut worst_full) = (0.0f64, 0.0f64);
    for _ in 0..corpora {
        let n = rng.random_range(1..25);
        let docs = random_corpus(&mut rng, n, &cats_str);
        let alpha = [1.0, 0.5, 0.01][rng.random_range(0..3)];
        let raw = raw_all(&docs);
        let flat_model = train(&docs, &cats, &ModelConfig { alpha, ..flat.clone() }).unwrap();
        let full_model = train(&docs, &cats, &ModelConfig { alpha, ..full.clone() }).unwrap();
        for _ in 0..5 {
            let probe = random_test_doc(&mut rng);
            let rp = RawDoc::of(&probe);
            worst_flat = worst_flat.max(max_abs_diff(
                &model_scores(&flat_model, &probe),
                &flat_nb_scores(&raw, &cats, alpha, &rp),
            ));
            worst_full = worst_full.max(max_abs_diff(
                &model_scores(&full_model, &probe),
                &splitting_nb_scores(&raw, &cats, alpha, &rp),
            ));
        }
    }
    (worst_flat, worst_full)
}

/// Fixed document templates over two contexts and four terms.
pub fn enumerated_templates() -> Vec<Vec<(&'static str, &'static str, u32)>> {
    vec![
        vec![("D/A", "w", 1)],
        vec![("D/A", "w", 2), ("D/A", "x", 1)],
        vec![("D/B", "y", 1)],
        vec![("D/A", "x", 1), ("D/B", "z", 3)],
        vec![("D/A", "w", 1), ("D/A", "x", 1), ("D/B", "y", 1), ("D/B", "z", 1)],
        vec![("D/B", "w", 2)],
    ]
}

pub fn enumerated_probes() -> Vec<ContextualizedDocument> {
    let bags: [&[(&str, &str, u32)]; 6] = [
        &[("D/A", "w", 1)],
        &[("D/A", "w", 1), ("D/B", "z", 1)],
        &[("D/B", "x", 2), ("D/A", "y", 1)],
        &[("D/A", "z", 3)],
        &[("D/B", "w", 1), ("D/B", "y", 2), ("D/A", "x", 1)],
        &[("D/A", "w", 1), ("D/A", "x", 1), ("D/A", "y", 1), ("D/A", "z", 1)],
    ];
    bags.iter()
        .map(|bag| {
            bag.iter()
                .fold(ContextualizedDocument::new("probe", ["?"]), |d, &(c, t, n)| d.with(c, t, n))
        })
        .collect()
}

/// Every multiset of 1 to 3 labeled templates (two labels).
pub fn enumerated_corpora() -> Vec<Vec<ContextualizedDocument>> {
    let templates = enumerated_templates();
    let mut choices = Vec::new();
    for (ti, t) in templates.iter().enumerate() {
        for label in ["c1", "c2"] {
            choices.push((ti, label, t.clone()));
        }
    }
    let make = |picks: &[usize]| -> Vec<ContextualizedDocument> {
        picks
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let (_, label, rows) = &choices[p];
                rows.iter()
                    .fold(ContextualizedDocument::new(format!("d{i}"), [*label]), |d, &(c, t, n)| d.with(c, t, n))
            })
            .collect()
    };
    let k = choices.len();
    let mut out = Vec::new();
    for a in 0..k {
        out.push(make(&[a]));
        for b in a..k {
            out.push(make(&[a, b]));
            for c in b..k {
                out.push(make(&[a, b, c]));
            }
        }
    }
    out
}

/// Compares every enumerated corpus and probe against the direct evaluator
/// under unit and both coverage weightings. Returns (cases, worst deviation).
pub fn brute_force_deviation() -> (usize, f64) {
    use scanb::model::{train, ContextMapping, ModelConfig, Orientation, WeightingStrategy};
    let cats = strings(&["c1", "c2"]);
    let strategies = [
        (WeightingStrategy::Unity, OracleWeight::One),
        (WeightingStrategy::coverage(Orientation::AsPrinted), OracleWeight::CoverageOverLength),
        (WeightingStrategy::coverage(Orientation::Inverted), OracleWeight::LengthOverCoverage),
    ];
    let probes = enumerated_probes();
    let mut cases = 0;
    let mut worst = 0.0f64;
    for corpus in enumerated_corpora() {
        let raw = raw_all(&corpus);
        for (strategy, oracle_weight) in &strategies {
            let config = ModelConfig {
                mapping: ContextMapping::FullPath,
                strategy: strategy.clone(),
                alpha: 1.0,
            };
            let model = train(&corpus, &cats, &config).unwrap();
            for probe in &probes {
                let expected = brute_force_scores(&raw, &cats, 1.0, *oracle_weight, |_| true, &RawDoc::of(probe));
                worst = worst.max(max_abs_diff(&model_scores(&model, probe), &expected));
                cases += 1;
            }
        }
    }
    (cases, worst)
}
