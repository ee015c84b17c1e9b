use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Confusion counts for one category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        Counts { tp, fp, fn_ }
    }

    fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

/// Precision, recall and F₁.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Prf {
    pub fn from_counts(c: Counts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        Prf {
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }
}

/// Per-category TP/FP/FN.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfusionCounts(BTreeMap<String, Counts>);

impl ConfusionCounts {
    pub fn new<'a>(categories: impl IntoIterator<Item = &'a String>) -> Self {
        ConfusionCounts(categories.into_iter().map(|c| (c.clone(), Counts::default())).collect())
    }

    pub fn from_map(map: BTreeMap<String, Counts>) -> Self {
        ConfusionCounts(map)
    }

    /// Scores one document's predicted label set against its true labels.
    /// Only the tracked categories are counted.
    pub fn record(&mut self, truth: &BTreeSet<String>, predicted: &BTreeSet<String>) {
        for (cat, c) in self.0.iter_mut() {
            match (truth.contains(cat), predicted.contains(cat)) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => {}
            }
        }
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        for (cat, c) in &other.0 {
            self.0.entry(cat.clone()).or_default().add(*c);
        }
    }

    pub fn get(&self, category: &str) -> Counts {
        self.0.get(category).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Counts)> {
        self.0.iter()
    }

    /// Counts summed over categories.
    pub fn pooled(&self) -> Counts {
        let mut total = Counts::default();
        for c in self.0.values() {
            total.add(*c);
        }
        total
    }
}

pub fn compute_prf(counts: &ConfusionCounts, category: &str) -> Prf {
    Prf::from_counts(counts.get(category))
}

/// Precision and recall from counts summed over all categories.
pub fn micro_average(counts: &ConfusionCounts) -> Prf {
    Prf::from_counts(counts.pooled())
}
