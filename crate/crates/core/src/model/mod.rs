//! Structural-context naive Bayes: training, node weighting, scoring.
//!
//! A document's score for category ω is
//!
//! ```text
//! log P(ω) + Σ_n  w(n, ω) · Σ_{v at n} log P(v | n, ω)
//! ```
//!
//! over the contexts `n` that survive the [`ContextMapping`]. Flat naive Bayes
//! ([`ContextMapping::FlattenAll`]), splitting naive Bayes (unit weights) and
//! the vocabulary-coverage weighted model are all configurations of the same
//! engine.

mod mapping;
mod persist;
mod scanb;
mod stats;

use thiserror::Error;

pub use mapping::{
    flat_context, map_context, ContextMapping, Orientation, WeightingStrategy, FLAT_CONTEXT, WEIGHT_EPSILON,
};
pub use persist::{load_model, load_model_from_slice, save_model, save_model_to_vec, FORMAT_VERSION};
pub use scanb::{train, train_with, Margins, ModelConfig, ScanbModel, ScoreVector};
pub use stats::{CategoryStats, ContextStats, ContextTable, TrainStats};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("no categories given")]
    NoCategories,
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("document {0:?} has no label")]
    UnlabeledDocument(String),
    #[error("alpha must be positive, got {0}")]
    InvalidAlpha(f64),
    #[error("invalid context mapping: {0}")]
    InvalidMapping(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("model i/o: {0}")]
    Io(String),
}
