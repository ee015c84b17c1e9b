use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::mapping::{ContextMapping, Orientation, WeightingStrategy};
use super::stats::{ContextTable, TrainStats};
use super::ModelError;
use crate::corpus::{ContextualizedDocument, Occurrences, StructuralContext, Token, REUTERS_COMPONENTS};
use crate::exec::Execution;

/// Everything that selects one member of the NB / NBS′ / SCANB family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub mapping: ContextMapping,
    pub strategy: WeightingStrategy,
    /// Additive smoothing pseudo-count.
    pub alpha: f64,
}

impl ModelConfig {
    /// Flat-text multinomial naive Bayes.
    pub fn flat_nb() -> Self {
        ModelConfig {
            mapping: ContextMapping::FlattenAll,
            strategy: WeightingStrategy::Unity,
            alpha: 1.0,
        }
    }

    /// Splitting naive Bayes over the Reuters text components, unit weights.
    pub fn splitting_nb() -> Self {
        ModelConfig {
            mapping: ContextMapping::whitelist(REUTERS_COMPONENTS),
            strategy: WeightingStrategy::Unity,
            alpha: 1.0,
        }
    }

    /// Splitting model with vocabulary-coverage node weights.
    pub fn scanb(orientation: Orientation) -> Self {
        ModelConfig {
            strategy: WeightingStrategy::coverage(orientation),
            ..Self::splitting_nb()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ModelError::InvalidAlpha(self.alpha));
        }
        self.mapping.validate()?;
        self.strategy.validate()
    }
}

/// Smoothed term distribution of one class at one context, in log space.
#[derive(Debug, Clone)]
struct ContextDist {
    log_probs: HashMap<Token, f64>,
    /// Log probability of a term never seen here.
    log_floor: f64,
    vocab: usize,
}

impl ContextDist {
    fn new(stats: Option<&super::stats::ContextStats>, alpha: f64, vocab_size: f64) -> Self {
        let total = stats.map_or(0, |s| s.total) as f64;
        let denom = total + alpha * vocab_size;
        let log_probs = stats
            .map(|s| {
                s.counts
                    .iter()
                    .map(|(t, &n)| (t.clone(), ((n as f64 + alpha) / denom).ln()))
                    .collect()
            })
            .unwrap_or_default();
        ContextDist {
            log_probs,
            log_floor: (alpha / denom).ln(),
            vocab: stats.map_or(0, |s| s.vocab_size()),
        }
    }

    fn log_prob(&self, term: &str) -> f64 {
        self.log_probs.get(term).copied().unwrap_or(self.log_floor)
    }
}

#[derive(Debug, Clone)]
struct ClassModel {
    log_prior: f64,
    contexts: HashMap<StructuralContext, ContextDist>,
    unseen: ContextDist,
}

impl ClassModel {
    fn new(prior: f64, table: &ContextTable, alpha: f64, vocab_size: f64) -> Self {
        ClassModel {
            log_prior: prior.ln(),
            contexts: table
                .iter()
                .map(|(ctx, s)| (ctx.clone(), ContextDist::new(Some(s), alpha, vocab_size)))
                .collect(),
            unseen: ContextDist::new(None, alpha, vocab_size),
        }
    }

    fn dist(&self, ctx: &StructuralContext) -> &ContextDist {
        self.contexts.get(ctx).unwrap_or(&self.unseen)
    }

    fn score(&self, mapped: &Occurrences, strategy: &WeightingStrategy) -> f64 {
        let mut score = self.log_prior;
        for (ctx, bag) in mapped.contexts() {
            let dist = self.dist(ctx);
            let doc_tokens: u64 = bag.values().map(|&n| u64::from(n)).sum();
            let loglik: f64 = bag
                .iter()
                .map(|(t, &n)| f64::from(n) * dist.log_prob(t.as_str()))
                .sum();
            score += strategy.weight(ctx, doc_tokens, dist.vocab) * loglik;
        }
        score
    }
}

/// Per-category log scores plus the decoded argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub categories: Vec<String>,
    pub scores: Vec<f64>,
    /// Index of the best category; ties go to the lexicographically smallest
    /// name.
    pub best: usize,
}

impl ScoreVector {
    fn new(categories: Vec<String>, scores: Vec<f64>) -> Self {
        // `categories` is sorted, so the first strict maximum wins ties.
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        ScoreVector {
            categories,
            scores,
            best,
        }
    }

    pub fn best_category(&self) -> &str {
        &self.categories[self.best]
    }

    pub fn get(&self, category: &str) -> Option<f64> {
        self.categories
            .iter()
            .position(|c| c == category)
            .map(|i| self.scores[i])
    }
}

/// Per-category decision thresholds on `score(ω) - score(¬ω)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub default: f64,
    #[serde(default)]
    pub per_category: BTreeMap<String, f64>,
}

impl Margins {
    pub fn uniform(default: f64) -> Self {
        Margins {
            default,
            per_category: BTreeMap::new(),
        }
    }

    pub fn of(&self, category: &str) -> f64 {
        self.per_category.get(category).copied().unwrap_or(self.default)
    }
}

/// A trained, immutable classifier.
///
/// Holds the multi-class model over all categories and, for every category,
/// the one-vs-rest pair `(ω, ¬ω)` used for multilabel decisions. Both are
/// derived from the same [`TrainStats`].
#[derive(Debug, Clone)]
pub struct ScanbModel {
    categories: Vec<String>,
    config: ModelConfig,
    stats: TrainStats,
    classes: Vec<ClassModel>,
    binaries: Vec<(ClassModel, ClassModel)>,
    metadata: Option<serde_json::Value>,
}

pub fn train(
    docs: &[ContextualizedDocument],
    categories: &[String],
    config: &ModelConfig,
) -> Result<ScanbModel, ModelError> {
    train_with(docs, categories, config, Execution::Parallel)
}

pub fn train_with(
    docs: &[ContextualizedDocument],
    categories: &[String],
    config: &ModelConfig,
    execution: Execution,
) -> Result<ScanbModel, ModelError> {
    config.validate()?;
    let categories = normalize_categories(categories)?;
    if docs.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let known: BTreeSet<&String> = categories.iter().collect();
    for doc in docs {
        if doc.labels.is_empty() {
            return Err(ModelError::UnlabeledDocument(doc.doc_id.clone()));
        }
        if let Some(bad) = doc.labels.iter().find(|l| !known.contains(l)) {
            return Err(ModelError::UnknownCategory(bad.clone()));
        }
    }

    const CHUNK: usize = 256;
    let chunks: Vec<&[ContextualizedDocument]> = docs.chunks(CHUNK).collect();
    let partials = execution.map(&chunks, |chunk| {
        let mut stats = TrainStats::with_categories(&categories);
        for doc in *chunk {
            let mapped = doc.occurrences.remap(|c| config.mapping.map(c));
            stats.add_document(&doc.labels, &mapped);
        }
        stats
    });
    let mut stats = TrainStats::with_categories(&categories);
    for partial in partials {
        stats.merge(partial);
    }
    ScanbModel::from_stats(categories, config.clone(), stats)
}

fn normalize_categories(categories: &[String]) -> Result<Vec<String>, ModelError> {
    let set: BTreeSet<String> = categories.iter().cloned().collect();
    if set.is_empty() {
        return Err(ModelError::NoCategories);
    }
    if set.iter().any(|c| c.is_empty()) {
        return Err(ModelError::UnknownCategory(String::new()));
    }
    Ok(set.into_iter().collect())
}

impl ScanbModel {
    pub(crate) fn from_stats(
        categories: Vec<String>,
        config: ModelConfig,
        stats: TrainStats,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        let label_total = stats.label_occurrences();
        if stats.documents == 0 || label_total == 0 {
            return Err(ModelError::EmptyTrainingSet);
        }
        let alpha = config.alpha;
        let vocab_size = stats.vocabulary.len().max(1) as f64;
        let n_docs = stats.documents as f64;
        let empty = ContextTable::new();

        let mut classes = Vec::with_capacity(categories.len());
        let mut binaries = Vec::with_capacity(categories.len());
        for name in &categories {
            let cat = stats.categories.get(name);
            let own_docs = cat.map_or(0, |c| c.documents) as f64;
            let table = cat.map_or(&empty, |c| &c.contexts);
            classes.push(ClassModel::new(own_docs / label_total as f64, table, alpha, vocab_size));
            let rest = stats.complement(name);
            binaries.push((
                ClassModel::new(own_docs / n_docs, table, alpha, vocab_size),
                ClassModel::new((n_docs - own_docs) / n_docs, &rest, alpha, vocab_size),
            ));
        }
        Ok(ScanbModel {
            categories,
            config,
            stats,
            classes,
            binaries,
            metadata: None,
        })
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn stats(&self) -> &TrainStats {
        &self.stats
    }

    pub fn vocabulary(&self) -> &BTreeSet<Token> {
        &self.stats.vocabulary
    }

    /// Free-form data carried along in the saved model file.
    pub fn metadata(&self) -> Option<&serde_json::Value> {
        self.metadata.as_ref()
    }

    pub fn with_metadata(mut self, metadata: serde_json::Value) -> Self {
        self.metadata = Some(metadata);
        self
    }

    fn index_of(&self, category: &str) -> Option<usize> {
        self.categories.binary_search_by(|c| c.as_str().cmp(category)).ok()
    }

    pub fn prior(&self, category: &str) -> Option<f64> {
        self.index_of(category).map(|i| self.classes[i].log_prior.exp())
    }

    pub fn log_prior(&self, category: &str) -> Option<f64> {
        self.index_of(category).map(|i| self.classes[i].log_prior)
    }

    /// Smoothed `log P(term | ctx, category)`; `ctx` is a mapped context.
    pub fn log_prob(&self, term: &str, ctx: &StructuralContext, category: &str) -> Option<f64> {
        self.index_of(category)
            .map(|i| self.classes[i].dist(ctx).log_prob(term))
    }

    /// Contexts with training data for `category`.
    pub fn trained_contexts(&self, category: &str) -> Vec<&StructuralContext> {
        self.index_of(category)
            .map(|i| {
                let mut v: Vec<_> = self.classes[i].contexts.keys().collect();
                v.sort();
                v
            })
            .unwrap_or_default()
    }

    /// Document occurrences re-keyed through the model's context mapping.
    pub fn map_document(&self, doc: &ContextualizedDocument) -> Occurrences {
        doc.occurrences.remap(|c| self.config.mapping.map(c))
    }

    /// Weight of mapped context `n` of `doc` for `category`.
    pub fn node_weight(&self, doc: &ContextualizedDocument, n: &StructuralContext, category: &str) -> Option<f64> {
        let i = self.index_of(category)?;
        let mapped = self.map_document(doc);
        let doc_tokens = mapped.count_at(n);
        Some(self.config.strategy.weight(n, doc_tokens, self.classes[i].dist(n).vocab))
    }

    pub fn score(&self, doc: &ContextualizedDocument) -> ScoreVector {
        let mapped = self.map_document(doc);
        let scores = self
            .classes
            .iter()
            .map(|c| c.score(&mapped, &self.config.strategy))
            .collect();
        ScoreVector::new(self.categories.clone(), scores)
    }

    pub fn classify(&self, doc: &ContextualizedDocument) -> String {
        self.score(doc).best_category().to_owned()
    }

    /// `score(ω) - score(¬ω)` under each one-vs-rest pair.
    pub fn binary_score_differences(&self, doc: &ContextualizedDocument) -> Vec<(String, f64)> {
        let mapped = self.map_document(doc);
        let strategy = &self.config.strategy;
        self.categories
            .iter()
            .zip(&self.binaries)
            .map(|(name, (pos, neg))| {
                (name.clone(), pos.score(&mapped, strategy) - neg.score(&mapped, strategy))
            })
            .collect()
    }

    /// Every category whose one-vs-rest score difference exceeds its margin.
    pub fn classify_multilabel(&self, doc: &ContextualizedDocument, margins: &Margins) -> BTreeSet<String> {
        self.binary_score_differences(doc)
            .into_iter()
            .filter(|(name, diff)| *diff > margins.of(name))
            .map(|(name, _)| name)
            .collect()
    }
}
