use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::corpus::StructuralContext;

/// Context every occurrence collapses to under [`ContextMapping::FlattenAll`].
pub const FLAT_CONTEXT: &str = "TEXT*";

/// Replaces zero numerators and denominators in coverage weights.
pub const WEIGHT_EPSILON: f64 = 1e-6;

/// How document contexts are keyed in the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "elements", rename_all = "kebab-case")]
pub enum ContextMapping {
    /// One synthetic context for the whole document: flat-text naive Bayes.
    FlattenAll,
    /// Full element path.
    FullPath,
    /// Full element path, kept only when its last element is listed.
    Whitelist(BTreeSet<String>),
}

impl ContextMapping {
    pub fn whitelist<I: IntoIterator<Item = S>, S: Into<String>>(elements: I) -> Self {
        ContextMapping::Whitelist(elements.into_iter().map(Into::into).collect())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ContextMapping::Whitelist(set) if set.is_empty() => {
                Err(ModelError::InvalidMapping("whitelist must not be empty".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn map(&self, ctx: &StructuralContext) -> Option<StructuralContext> {
        match self {
            ContextMapping::FlattenAll => Some(flat_context()),
            ContextMapping::FullPath => Some(ctx.clone()),
            ContextMapping::Whitelist(set) => set.contains(ctx.last()).then(|| ctx.clone()),
        }
    }
}

pub fn map_context(ctx: &StructuralContext, mapping: &ContextMapping) -> Option<StructuralContext> {
    mapping.map(ctx)
}

pub fn flat_context() -> StructuralContext {
    StructuralContext::parse(FLAT_CONTEXT).expect("constant context is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `|V_{n,ω}| / |d_n|`
    #[default]
    AsPrinted,
    /// `|d_n| / |V_{n,ω}|`
    Inverted,
}

/// Per-node weight applied to a context's summed log-likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightingStrategy {
    Unity,
    VocabularyCoverage {
        orientation: Orientation,
    },
    /// Table of weights by context. A context's weight is the product of the
    /// entries for all of its prefixes; missing entries count as 1.
    Fixed {
        weights: BTreeMap<StructuralContext, f64>,
    },
}

impl WeightingStrategy {
    pub fn coverage(orientation: Orientation) -> Self {
        WeightingStrategy::VocabularyCoverage { orientation }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if let WeightingStrategy::Fixed { weights } = self {
            for (ctx, &w) in weights {
                if !(w.is_finite() && w > 0.0) {
                    return Err(ModelError::InvalidWeight(format!(
                        "weight for {ctx} must be positive and finite, got {w}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Weight of context `n` for a document holding `doc_tokens` occurrences
    /// there, against a class whose training vocabulary at `n` has
    /// `class_vocab` distinct terms.
    pub fn weight(&self, n: &StructuralContext, doc_tokens: u64, class_vocab: usize) -> f64 {
        match self {
            WeightingStrategy::Unity => 1.0,
            WeightingStrategy::VocabularyCoverage { orientation } => {
                if doc_tokens == 0 || class_vocab == 0 {
                    return WEIGHT_EPSILON;
                }
                let (v, d) = (class_vocab as f64, doc_tokens as f64);
                match orientation {
                    Orientation::AsPrinted => v / d,
                    Orientation::Inverted => d / v,
                }
            }
            WeightingStrategy::Fixed { weights } => n
                .prefixes()
                .filter_map(|p| weights.get(p).copied())
                .product(),
        }
    }
}
