use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::tree::{DocTree, NodeId};
use super::CorpusError;

/// Element path from the document root down to a node, inclusive.
///
/// Stored in canonical `A/B/C` form; equality, ordering and hashing all use
/// that string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructuralContext(String);

impl StructuralContext {
    pub fn from_elements<I, S>(elements: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut canonical = String::new();
        for (i, e) in elements.into_iter().enumerate() {
            let e = e.as_ref();
            if e.is_empty() || e.contains('/') {
                return Err(CorpusError::InvalidContext(format!(
                    "invalid element name {e:?}"
                )));
            }
            if i > 0 {
                canonical.push('/');
            }
            canonical.push_str(e);
        }
        if canonical.is_empty() {
            return Err(CorpusError::InvalidContext("empty element path".into()));
        }
        Ok(StructuralContext(canonical))
    }

    pub fn parse(canonical: &str) -> Result<Self, CorpusError> {
        Self::from_elements(canonical.split('/'))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn elements(&self) -> impl Iterator<Item = &str> {
        self.0.split('/')
    }

    pub fn depth(&self) -> usize {
        self.elements().count()
    }

    pub fn last(&self) -> &str {
        self.0.rsplit('/').next().unwrap_or(&self.0)
    }

    /// Every non-empty prefix, root first, ending with `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = &str> {
        self.0
            .match_indices('/')
            .map(|(i, _)| &self.0[..i])
            .chain(std::iter::once(self.0.as_str()))
    }
}

impl fmt::Display for StructuralContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for StructuralContext {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl std::str::FromStr for StructuralContext {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for StructuralContext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for StructuralContext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Context of a text leaf: the path to the element that directly holds it.
pub fn leaf_context(tree: &DocTree, leaf: NodeId) -> Option<StructuralContext> {
    let parent = tree.node(leaf).parent?;
    StructuralContext::from_elements(tree.element_path(parent)).ok()
}

/// One `(context, text)` entry per non-blank text leaf, in document order.
pub fn extract_contexts(tree: &DocTree) -> Vec<(StructuralContext, String)> {
    extract_contexts_under(tree, tree.root())
}

/// Like [`extract_contexts`], restricted to the subtree at `from`. Contexts
/// still start at the document root.
pub fn extract_contexts_under(tree: &DocTree, from: NodeId) -> Vec<(StructuralContext, String)> {
    tree.descendants(from)
        .filter_map(|node| {
            let text = node.text.as_ref()?;
            if text.trim().is_empty() {
                return None;
            }
            Some((leaf_context(tree, node.id)?, text.clone()))
        })
        .collect()
}
