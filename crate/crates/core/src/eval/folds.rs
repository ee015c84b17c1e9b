use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::ContextualizedDocument;

/// A partition of document ids into `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<Vec<String>>,
}

impl FoldPlan {
    /// Fold index of every document id.
    pub fn assignments(&self) -> HashMap<&str, usize> {
        self.folds
            .iter()
            .enumerate()
            .flat_map(|(i, f)| f.iter().map(move |id| (id.as_str(), i)))
            .collect()
    }

    /// Checks that the folds partition exactly the ids of `docs`.
    pub fn check_partition(&self, docs: &[ContextualizedDocument]) -> Result<(), EvalError> {
        let assigned = self.assignments();
        let listed: usize = self.folds.iter().map(Vec::len).sum();
        if assigned.len() != listed {
            return Err(EvalError::PlanMismatch("a document id appears in two folds".into()));
        }
        if listed != docs.len() {
            return Err(EvalError::PlanMismatch(format!(
                "plan covers {listed} documents, corpus has {}",
                docs.len()
            )));
        }
        if let Some(d) = docs.iter().find(|d| !assigned.contains_key(d.doc_id.as_str())) {
            return Err(EvalError::PlanMismatch(format!("document {} has no fold", d.doc_id)));
        }
        Ok(())
    }
}

/// Stratified, seeded k-fold plan.
///
/// Each document is stratified by its rarest label (corpus frequency, ties
/// to the smallest name). Documents are sorted by id, shuffled within each
/// stratum, and dealt round-robin across folds, so fold sizes differ by at
/// most one and the plan does not depend on input order.
pub fn make_folds(docs: &[ContextualizedDocument], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFoldCount(k));
    }
    if docs.len() < k {
        return Err(EvalError::TooFewDocuments { documents: docs.len(), k });
    }
    let mut seen = std::collections::HashSet::with_capacity(docs.len());
    if let Some(dup) = docs.iter().find(|d| !seen.insert(d.doc_id.as_str())) {
        return Err(EvalError::DuplicateDocId(dup.doc_id.clone()));
    }
    let mut frequency: HashMap<&str, usize> = HashMap::new();
    for d in docs {
        for l in &d.labels {
            *frequency.entry(l.as_str()).or_insert(0) += 1;
        }
    }
    let mut strata: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for d in docs {
        let key = d
            .labels
            .iter()
            .min_by_key(|l| (frequency[l.as_str()], l.as_str()))
            .map_or("", String::as_str);
        strata.entry(key).or_default().push(d.doc_id.as_str());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(docs.len());
    for ids in strata.values_mut() {
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        order.extend(ids.iter().copied());
    }
    let mut folds = vec![Vec::new(); k];
    for (i, id) in order.into_iter().enumerate() {
        folds[i % k].push(id.to_owned());
    }
    let plan = FoldPlan { k, seed, folds };
    plan.check_partition(docs)?;
    Ok(plan)
}
