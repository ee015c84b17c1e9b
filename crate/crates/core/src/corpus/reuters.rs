use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::context::extract_contexts_under;
use super::document::{ContextualizedDocument, Occurrences};
use super::parse::{parse_document, ParseMode};
use super::tokenize::{tokenize, TokenizeConfig};
use super::tree::{DocTree, NodeId};
use super::CorpusError;
use crate::exec::Execution;

/// The ten categories of the standard Reuters-21578 comparison.
pub const REUTERS_TEN: [&str; 10] = [
    "acq", "corn", "crude", "earn", "grain", "interest", "money-fx", "ship", "trade", "wheat",
];

/// Text components used as structural contexts in that comparison.
pub const REUTERS_COMPONENTS: [&str; 3] = ["TITLE", "DATELINE", "BODY"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitFilter {
    /// Every REUTERS element.
    #[default]
    All,
    /// `TOPICS="YES"` and `LEWISSPLIT` in {TRAIN, TEST}.
    ModApte,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    /// Keep only these labels; documents left without labels are dropped.
    pub categories: Option<BTreeSet<String>>,
    /// Keep only occurrences whose context ends in one of these elements.
    pub context_whitelist: Option<BTreeSet<String>>,
    pub tokenizer: TokenizeConfig,
    pub split: SplitFilter,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            categories: None,
            context_whitelist: None,
            tokenizer: TokenizeConfig::default(),
            split: SplitFilter::All,
            execution: Execution::Parallel,
        }
    }
}

impl CorpusConfig {
    /// Ten categories, TITLE/DATELINE/BODY contexts, default tokenizer.
    pub fn reuters_ten() -> Self {
        CorpusConfig {
            categories: Some(REUTERS_TEN.iter().map(|s| s.to_string()).collect()),
            context_whitelist: Some(REUTERS_COMPONENTS.iter().map(|s| s.to_string()).collect()),
            ..CorpusConfig::default()
        }
    }

    fn keeps_context(&self, last_element: &str) -> bool {
        self.context_whitelist
            .as_ref()
            .is_none_or(|w| w.contains(last_element))
    }
}

/// Sorted `.sgm` files in `dir`.
pub fn sgm_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CorpusError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CorpusError::io(dir, e))?.path();
        let is_sgm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("sgm"));
        if is_sgm && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CorpusError::NoSgmFiles(dir.to_path_buf()));
    }
    Ok(files)
}

/// Loads every REUTERS element of every `.sgm` file in `dir`, in file-name
/// then document order.
pub fn load_reuters(dir: &Path, config: &CorpusConfig) -> Result<Vec<ContextualizedDocument>, CorpusError> {
    let files = sgm_files(dir)?;
    let per_file = config
        .execution
        .try_map(&files, |path| load_sgm_file(path, config))?;
    Ok(per_file.into_iter().flatten().collect())
}

pub fn load_sgm_file(path: &Path, config: &CorpusConfig) -> Result<Vec<ContextualizedDocument>, CorpusError> {
    let raw = std::fs::read(path).map_err(|e| CorpusError::io(path, e))?;
    let tree = parse_document(&raw, ParseMode::Lenient).map_err(|e| CorpusError::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })?;
    Ok(reuters_documents(&tree, config))
}

/// Converts every REUTERS element of `tree` into a document, applying the
/// split, category and context filters of `config`.
pub fn reuters_documents(tree: &DocTree, config: &CorpusConfig) -> Vec<ContextualizedDocument> {
    tree.descendants(tree.root())
        .filter(|n| n.element.eq_ignore_ascii_case("REUTERS"))
        .filter_map(|n| reuters_document(tree, n.id, config))
        .collect()
}

fn reuters_document(tree: &DocTree, id: NodeId, config: &CorpusConfig) -> Option<ContextualizedDocument> {
    let node = tree.node(id);
    if config.split == SplitFilter::ModApte {
        let topics = node.attribute("TOPICS").unwrap_or_default();
        let split = node.attribute("LEWISSPLIT").unwrap_or_default();
        if topics != "YES" || !matches!(split, "TRAIN" | "TEST") {
            return None;
        }
    }
    let mut labels = topic_labels(tree, id);
    if let Some(categories) = &config.categories {
        labels.retain(|l| categories.contains(l));
        if labels.is_empty() {
            return None;
        }
    }
    let doc_id = node
        .attribute("NEWID")
        .or_else(|| node.attribute("OLDID"))
        .unwrap_or_default()
        .to_owned();
    Some(ContextualizedDocument {
        doc_id,
        labels,
        occurrences: occurrences_under(tree, id, config),
        split_tag: node.attribute("LEWISSPLIT").map(str::to_owned),
    })
}

/// Tokenized text leaves below `from`, keyed by structural context.
pub fn occurrences_under(tree: &DocTree, from: NodeId, config: &CorpusConfig) -> Occurrences {
    let mut occ = Occurrences::new();
    for (ctx, text) in extract_contexts_under(tree, from) {
        if config.keeps_context(ctx.last()) {
            occ.add_all(&ctx, tokenize(&text, &config.tokenizer));
        }
    }
    occ
}

/// Builds an unlabeled document from a whole parsed file.
pub fn document_from_tree(doc_id: impl Into<String>, tree: &DocTree, config: &CorpusConfig) -> ContextualizedDocument {
    ContextualizedDocument {
        doc_id: doc_id.into(),
        labels: BTreeSet::new(),
        occurrences: occurrences_under(tree, tree.root(), config),
        split_tag: None,
    }
}

/// Text of the `D` elements under the `TOPICS` child of a REUTERS element.
pub fn topic_labels(tree: &DocTree, reuters: NodeId) -> BTreeSet<String> {
    tree.children(reuters)
        .filter(|n| n.element.eq_ignore_ascii_case("TOPICS"))
        .flat_map(|topics| tree.descendants(topics.id))
        .filter(|n| n.element.eq_ignore_ascii_case("D"))
        .map(|d| tree.text_content(d.id).trim().to_owned())
        .filter(|l| !l.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub occurrences: u64,
    pub labels: BTreeMap<String, usize>,
}

impl CorpusSummary {
    pub fn of(docs: &[ContextualizedDocument]) -> Self {
        let mut labels = BTreeMap::new();
        for doc in docs {
            for l in &doc.labels {
                *labels.entry(l.clone()).or_insert(0) += 1;
            }
        }
        CorpusSummary {
            documents: docs.len(),
            occurrences: docs.iter().map(|d| d.occurrences.total()).sum(),
            labels,
        }
    }
}
