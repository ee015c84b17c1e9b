use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::folds::{make_folds, FoldPlan};
use super::metrics::{micro_average, ConfusionCounts, Counts, Prf};
use super::EvalError;
use crate::corpus::ContextualizedDocument;
use crate::exec::Execution;
use crate::model::{train_with, ContextMapping, Margins, ModelConfig, WeightingStrategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub k: usize,
    pub seed: u64,
    pub margins: Margins,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k: 10,
            seed: 0,
            margins: Margins::default(),
            execution: Execution::Parallel,
        }
    }
}

/// What produced a report, enough to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFingerprint {
    pub mapping: ContextMapping,
    pub strategy: WeightingStrategy,
    pub alpha: f64,
    /// Digest of the tokenizer settings used to build the corpus, when known.
    #[serde(default)]
    pub tokenizer: Option<String>,
}

impl ConfigFingerprint {
    pub fn of(config: &ModelConfig) -> Self {
        ConfigFingerprint {
            mapping: config.mapping.clone(),
            strategy: config.strategy.clone(),
            alpha: config.alpha,
            tokenizer: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    #[serde(flatten)]
    pub counts: Counts,
    #[serde(flatten)]
    pub measures: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_category: BTreeMap<String, CategoryReport>,
    pub micro: Prf,
    pub micro_counts: Counts,
    pub folds: usize,
    pub seed: u64,
    pub documents: usize,
    pub fingerprint: ConfigFingerprint,
}

impl EvalReport {
    pub fn from_counts(counts: &ConfusionCounts, plan: &FoldPlan, documents: usize, config: &ModelConfig) -> Self {
        EvalReport {
            per_category: counts
                .iter()
                .map(|(c, &n)| {
                    (
                        c.clone(),
                        CategoryReport {
                            counts: n,
                            measures: Prf::from_counts(n),
                        },
                    )
                })
                .collect(),
            micro: micro_average(counts),
            micro_counts: counts.pooled(),
            folds: plan.k,
            seed: plan.seed,
            documents,
            fingerprint: ConfigFingerprint::of(config),
        }
    }

    pub fn counts(&self) -> ConfusionCounts {
        ConfusionCounts::from_map(self.per_category.iter().map(|(c, r)| (c.clone(), r.counts)).collect())
    }

    /// Aligned per-category table with a trailing micro-average row.
    pub fn to_text(&self) -> String {
        let width = self
            .per_category
            .keys()
            .map(String::len)
            .chain([8])
            .max()
            .unwrap_or(8);
        let mut out = format!(
            "{:<width$}  {:>6} {:>6} {:>6}  {:>9} {:>6} {:>6}\n",
            "category", "TP", "FP", "FN", "precision", "recall", "F1"
        );
        let row = |name: &str, c: &Counts, m: &Prf| {
            format!(
                "{:<width$}  {:>6} {:>6} {:>6}  {:>9.4} {:>6.4} {:>6.4}\n",
                name, c.tp, c.fp, c.fn_, m.precision, m.recall, m.f1
            )
        };
        for (name, r) in &self.per_category {
            out.push_str(&row(name, &r.counts, &r.measures));
        }
        out.push_str(&row("micro", &self.micro_counts, &self.micro));
        out
    }
}

/// One held-out prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    pub fold: usize,
    pub truth: BTreeSet<String>,
    pub predicted: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub report: EvalReport,
    pub per_fold: Vec<ConfusionCounts>,
    pub predictions: Vec<Prediction>,
}

/// Stratified k-fold cross-validation with one-vs-rest multilabel decisions.
pub fn cross_validate(
    docs: &[ContextualizedDocument],
    categories: &[String],
    config: &ModelConfig,
    k: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let options = CvOptions {
        k,
        seed,
        ..CvOptions::default()
    };
    let plan = make_folds(docs, k, seed)?;
    Ok(cross_validate_with_plan(docs, categories, config, &plan, &options)?.report)
}

/// Cross-validation over a given fold plan. Counts are pooled over folds
/// before any ratio is taken.
pub fn cross_validate_with_plan(
    docs: &[ContextualizedDocument],
    categories: &[String],
    config: &ModelConfig,
    plan: &FoldPlan,
    options: &CvOptions,
) -> Result<CvOutcome, EvalError> {
    config.validate()?;
    plan.check_partition(docs)?;
    let assignment = plan.assignments();
    let fold_of: Vec<usize> = docs.iter().map(|d| assignment[d.doc_id.as_str()]).collect();
    let tracked: BTreeSet<&String> = categories.iter().collect();
    let fold_ids: Vec<usize> = (0..plan.k).collect();

    let results = options.execution.try_map(&fold_ids, |&fold| {
        let train_docs: Vec<ContextualizedDocument> = docs
            .iter()
            .zip(&fold_of)
            .filter(|(_, &f)| f != fold)
            .map(|(d, _)| d.clone())
            .collect();
        // Folds already run in parallel.
        let inner = if options.execution.is_parallel() {
            Execution::Sequential
        } else {
            options.execution
        };
        let model = train_with(&train_docs, categories, config, inner)?;
        let mut counts = ConfusionCounts::new(categories);
        let mut predictions = Vec::new();
        for (doc, _) in docs.iter().zip(&fold_of).filter(|(_, &f)| f == fold) {
            let truth: BTreeSet<String> = doc.labels.iter().filter(|l| tracked.contains(l)).cloned().collect();
            let predicted = model.classify_multilabel(doc, &options.margins);
            counts.record(&truth, &predicted);
            predictions.push(Prediction {
                doc_id: doc.doc_id.clone(),
                fold,
                truth,
                predicted,
            });
        }
        Ok::<_, EvalError>((counts, predictions))
    })?;

    let mut pooled = ConfusionCounts::new(categories);
    let mut per_fold = Vec::with_capacity(plan.k);
    let mut predictions = Vec::with_capacity(docs.len());
    for (counts, preds) in results {
        pooled.merge(&counts);
        per_fold.push(counts);
        predictions.extend(preds);
    }
    Ok(CvOutcome {
        report: EvalReport::from_counts(&pooled, plan, docs.len(), config),
        per_fold,
        predictions,
    })
}

/// Counts recomputed from a prediction log.
pub fn counts_from_predictions(categories: &[String], predictions: &[Prediction]) -> ConfusionCounts {
    let mut counts = ConfusionCounts::new(categories);
    for p in predictions {
        counts.record(&p.truth, &p.predicted);
    }
    counts
}
