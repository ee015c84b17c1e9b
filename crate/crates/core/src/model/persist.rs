//! Versioned JSON model files.
//!
//! Only integer counts are authoritative; probabilities are rebuilt on load
//! through the same code path as training, so a reloaded model scores
//! bit-for-bit like the original.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::mapping::{ContextMapping, WeightingStrategy};
use super::scanb::{ModelConfig, ScanbModel};
use super::stats::{CategoryStats, ContextStats, TrainStats};
use super::ModelError;
use crate::corpus::{StructuralContext, Token};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    categories: Vec<String>,
    mapping: ContextMapping,
    strategy: WeightingStrategy,
    alpha: f64,
    /// Informational; recomputed and checked on load.
    priors: BTreeMap<String, f64>,
    documents: u64,
    category_documents: BTreeMap<String, u64>,
    /// `[context, category, term, count]`
    counts: Vec<(StructuralContext, String, Token, u64)>,
    /// `[context, category, total]`
    totals: Vec<(StructuralContext, String, u64)>,
    /// `[context, term, count]` over all training documents, each counted once.
    pooled_counts: Vec<(StructuralContext, Token, u64)>,
    vocabulary: Vec<Token>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

pub fn save_model<W: Write>(model: &ScanbModel, out: W) -> Result<(), ModelError> {
    serde_json::to_writer_pretty(out, &to_file(model)).map_err(|e| ModelError::Io(e.to_string()))
}

pub fn save_model_to_vec(model: &ScanbModel) -> Vec<u8> {
    serde_json::to_vec_pretty(&to_file(model)).expect("model serializes")
}

pub fn load_model<R: Read>(input: R) -> Result<ScanbModel, ModelError> {
    let file: ModelFile =
        serde_json::from_reader(input).map_err(|e| ModelError::CorruptModel(e.to_string()))?;
    from_file(file)
}

pub fn load_model_from_slice(bytes: &[u8]) -> Result<ScanbModel, ModelError> {
    load_model(bytes)
}

fn to_file(model: &ScanbModel) -> ModelFile {
    let stats = model.stats();
    let mut counts = Vec::new();
    let mut totals = Vec::new();
    for (cat, cs) in &stats.categories {
        for (ctx, s) in &cs.contexts {
            totals.push((ctx.clone(), cat.clone(), s.total));
            for (t, &n) in &s.counts {
                counts.push((ctx.clone(), cat.clone(), t.clone(), n));
            }
        }
    }
    let pooled_counts = stats
        .pooled
        .iter()
        .flat_map(|(ctx, s)| s.counts.iter().map(move |(t, &n)| (ctx.clone(), t.clone(), n)))
        .collect();
    ModelFile {
        format_version: FORMAT_VERSION,
        categories: model.categories().to_vec(),
        mapping: model.config().mapping.clone(),
        strategy: model.config().strategy.clone(),
        alpha: model.config().alpha,
        priors: model
            .categories()
            .iter()
            .map(|c| (c.clone(), model.prior(c).unwrap_or(0.0)))
            .collect(),
        documents: stats.documents,
        category_documents: stats
            .categories
            .iter()
            .map(|(c, s)| (c.clone(), s.documents))
            .collect(),
        counts,
        totals,
        pooled_counts,
        vocabulary: stats.vocabulary.iter().cloned().collect(),
        metadata: model.metadata().cloned(),
    }
}

fn corrupt(msg: impl Into<String>) -> ModelError {
    ModelError::CorruptModel(msg.into())
}

fn from_file(file: ModelFile) -> Result<ScanbModel, ModelError> {
    if file.format_version != FORMAT_VERSION {
        return Err(corrupt(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            file.format_version
        )));
    }
    if file.categories.is_empty() {
        return Err(corrupt("categories: empty"));
    }
    let categories: BTreeSet<String> = file.categories.iter().cloned().collect();
    if categories.len() != file.categories.len() || categories.iter().ne(file.categories.iter()) {
        return Err(corrupt("categories: not sorted and unique"));
    }
    if !(file.alpha.is_finite() && file.alpha > 0.0) {
        return Err(corrupt(format!("alpha: {} is not positive", file.alpha)));
    }

    let mut stats = TrainStats::with_categories(&categories);
    stats.documents = file.documents;
    stats.vocabulary = file.vocabulary.iter().cloned().collect();
    if stats.vocabulary.len() != file.vocabulary.len() {
        return Err(corrupt("vocabulary: duplicate terms"));
    }
    for (cat, n) in &file.category_documents {
        let entry = category(&mut stats, cat)?;
        entry.documents = *n;
        if *n > file.documents {
            return Err(corrupt(format!("category_documents: {cat} exceeds documents")));
        }
    }
    for (ctx, cat, term, n) in file.counts {
        if n == 0 {
            return Err(corrupt("counts: zero count"));
        }
        if !stats.vocabulary.contains(&term) {
            return Err(corrupt(format!("counts: term {term} missing from vocabulary")));
        }
        let cs = category(&mut stats, &cat)?.contexts.entry(ctx).or_default();
        if cs.counts.insert(term, n).is_some() {
            return Err(corrupt("counts: duplicate entry"));
        }
    }
    for (ctx, cat, total) in file.totals {
        let cs = category(&mut stats, &cat)?
            .contexts
            .get_mut(&ctx)
            .ok_or_else(|| corrupt(format!("totals: no counts for {ctx}/{cat}")))?;
        cs.total = total;
    }
    for cs in stats.categories.values().flat_map(|c| c.contexts.values()) {
        if cs.counts.values().sum::<u64>() != cs.total {
            return Err(corrupt("totals: do not match counts"));
        }
    }
    for (ctx, term, n) in file.pooled_counts {
        if n == 0 || !stats.vocabulary.contains(&term) {
            return Err(corrupt("pooled_counts: invalid entry"));
        }
        let s: &mut ContextStats = stats.pooled.entry(ctx).or_default();
        s.total += n;
        if s.counts.insert(term, n).is_some() {
            return Err(corrupt("pooled_counts: duplicate entry"));
        }
    }
    let pooled_terms: usize = stats.pooled.values().map(|s| s.counts.len()).sum();
    if pooled_terms > 0 || !stats.vocabulary.is_empty() {
        let seen: BTreeSet<&Token> = stats.pooled.values().flat_map(|s| s.counts.keys()).collect();
        if seen.len() != stats.vocabulary.len() {
            return Err(corrupt("vocabulary: does not match pooled_counts"));
        }
    }
    for cat in stats.categories.values() {
        for (ctx, cs) in &cat.contexts {
            let pooled = stats.pooled.get(ctx);
            for (t, &n) in &cs.counts {
                if pooled.and_then(|p| p.counts.get(t)).copied().unwrap_or(0) < n {
                    return Err(corrupt("pooled_counts: smaller than a category count"));
                }
            }
        }
    }

    let config = ModelConfig {
        mapping: file.mapping,
        strategy: file.strategy,
        alpha: file.alpha,
    };
    let model = ScanbModel::from_stats(file.categories, config, stats)
        .map_err(|e| corrupt(e.to_string()))?;
    for (cat, &p) in &file.priors {
        let actual = model
            .prior(cat)
            .ok_or_else(|| corrupt(format!("priors: unknown category {cat}")))?;
        if (actual - p).abs() > 1e-12 {
            return Err(corrupt(format!("priors: {cat} is {p}, counts give {actual}")));
        }
    }
    Ok(match file.metadata {
        Some(m) => model.with_metadata(m),
        None => model,
    })
}

fn category<'a>(stats: &'a mut TrainStats, name: &str) -> Result<&'a mut CategoryStats, ModelError> {
    stats
        .categories
        .get_mut(name)
        .ok_or_else(|| corrupt(format!("unknown category {name}")))
}
