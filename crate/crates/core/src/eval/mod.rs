//! Micro-averaged precision/recall/F₁, stratified fold plans, and
//! cross-validated model comparison.

mod compare;
mod cv;
mod folds;
mod metrics;

use thiserror::Error;

use crate::model::ModelError;

pub use compare::{
    compare_models, configs_with_both_orientations, standard_configs, ComparisonRow, ComparisonTable, NamedConfig,
};
pub use cv::{
    counts_from_predictions, cross_validate, cross_validate_with_plan, CategoryReport, ConfigFingerprint,
    CvOptions, CvOutcome, EvalReport, Prediction,
};
pub use folds::{make_folds, FoldPlan};
pub use metrics::{compute_prf, f1_score, micro_average, ConfusionCounts, Counts, Prf};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 2 folds, got {0}")]
    InvalidFoldCount(usize),
    #[error("{documents} documents cannot fill {k} folds")]
    TooFewDocuments { documents: usize, k: usize },
    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),
    #[error("fold plan does not match corpus: {0}")]
    PlanMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
