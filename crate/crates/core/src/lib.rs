//! Naive Bayes classification of semi-structured documents, where term
//! statistics are conditioned on the element path of each text leaf and each
//! path's contribution can be weighted.
//!
//! * [`corpus`]: markup parsing, structural contexts, tokenization and the
//!   Reuters-21578 loader.
//! * [`model`]: training, weighting strategies, scoring and model files.
//! * [`eval`]: precision/recall/F₁, fold plans and cross-validation.

pub mod corpus;
pub mod eval;
pub mod exec;
pub mod model;

pub use exec::Execution;
