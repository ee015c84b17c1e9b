use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Occurrences, StructuralContext, Token};

/// Term counts at one context for one class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextStats {
    pub counts: BTreeMap<Token, u64>,
    pub total: u64,
}

impl ContextStats {
    /// `|V_{n,ω}|`: distinct terms seen here.
    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    fn add(&mut self, token: &Token, n: u64) {
        *self.counts.entry(token.clone()).or_insert(0) += n;
        self.total += n;
    }

    /// `self - other`, term by term. `other` must be a sub-multiset of `self`.
    fn minus(&self, other: Option<&ContextStats>) -> ContextStats {
        let Some(other) = other else {
            return self.clone();
        };
        let counts: BTreeMap<Token, u64> = self
            .counts
            .iter()
            .filter_map(|(t, &n)| {
                let left = n - other.counts.get(t).copied().unwrap_or(0);
                (left > 0).then(|| (t.clone(), left))
            })
            .collect();
        ContextStats {
            total: self.total - other.total,
            counts,
        }
    }
}

pub type ContextTable = BTreeMap<StructuralContext, ContextStats>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryStats {
    /// Training documents carrying this label.
    pub documents: u64,
    pub contexts: ContextTable,
}

/// Empirical counts behind a trained model.
///
/// `categories` replicates a document into every category it is labeled
/// with; `pooled` counts each training document once, so the complement of
/// a category is `pooled - categories[ω]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrainStats {
    pub categories: BTreeMap<String, CategoryStats>,
    pub pooled: ContextTable,
    pub vocabulary: BTreeSet<Token>,
    pub documents: u64,
}

impl TrainStats {
    pub fn with_categories<'a>(names: impl IntoIterator<Item = &'a String>) -> Self {
        TrainStats {
            categories: names
                .into_iter()
                .map(|n| (n.clone(), CategoryStats::default()))
                .collect(),
            ..TrainStats::default()
        }
    }

    /// Adds one already-mapped document labeled with `labels` (all of which
    /// must be known categories).
    pub fn add_document<'a>(&mut self, labels: impl IntoIterator<Item = &'a String>, occ: &Occurrences) {
        self.documents += 1;
        for (ctx, t, n) in occ.triples() {
            let n = u64::from(n);
            self.pooled.entry(ctx.clone()).or_default().add(t, n);
            if !self.vocabulary.contains(t) {
                self.vocabulary.insert(t.clone());
            }
        }
        for label in labels {
            let cat = self
                .categories
                .get_mut(label)
                .expect("labels are validated before counting");
            cat.documents += 1;
            for (ctx, t, n) in occ.triples() {
                cat.contexts.entry(ctx.clone()).or_default().add(t, u64::from(n));
            }
        }
    }

    pub fn merge(&mut self, other: TrainStats) {
        self.documents += other.documents;
        self.vocabulary.extend(other.vocabulary);
        merge_tables(&mut self.pooled, other.pooled);
        for (name, cat) in other.categories {
            let dst = self.categories.entry(name).or_default();
            dst.documents += cat.documents;
            merge_tables(&mut dst.contexts, cat.contexts);
        }
    }

    /// Context table of the documents *not* labeled `category`.
    pub fn complement(&self, category: &str) -> ContextTable {
        let own = self.categories.get(category).map(|c| &c.contexts);
        self.pooled
            .iter()
            .map(|(ctx, stats)| (ctx.clone(), stats.minus(own.and_then(|o| o.get(ctx)))))
            .filter(|(_, s)| s.total > 0)
            .collect()
    }

    pub fn label_occurrences(&self) -> u64 {
        self.categories.values().map(|c| c.documents).sum()
    }
}

fn merge_tables(dst: &mut ContextTable, src: ContextTable) {
    for (ctx, stats) in src {
        let d = dst.entry(ctx).or_default();
        d.total += stats.total;
        for (t, n) in stats.counts {
            *d.counts.entry(t).or_insert(0) += n;
        }
    }
}
