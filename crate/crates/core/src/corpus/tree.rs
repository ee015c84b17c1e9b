use std::fmt::Write as _;

/// Index of a node inside its [`DocTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// Element name given to character-data leaves.
pub const TEXT_ELEMENT: &str = "#text";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub element: String,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Raw character data; only set on text leaves.
    pub text: Option<String>,
    /// Attributes as written. They are kept for metadata lookups (NEWID,
    /// LEWISSPLIT) and never take part in structural contexts.
    pub attributes: Vec<(String, String)>,
}

impl Node {
    pub fn is_text(&self) -> bool {
        self.text.is_some()
    }

    pub fn attribute(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

/// Element tree of one parsed document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTree {
    root: NodeId,
    nodes: Vec<Node>,
}

impl DocTree {
    pub(crate) fn new(root_element: String, attributes: Vec<(String, String)>) -> Self {
        DocTree {
            root: NodeId(0),
            nodes: vec![Node {
                id: NodeId(0),
                element: root_element,
                parent: None,
                children: Vec::new(),
                text: None,
                attributes,
            }],
        }
    }

    pub(crate) fn push_element(
        &mut self,
        parent: NodeId,
        element: String,
        attributes: Vec<(String, String)>,
    ) -> NodeId {
        self.push(parent, element, None, attributes)
    }

    pub(crate) fn push_text(&mut self, parent: NodeId, text: String) -> NodeId {
        self.push(parent, TEXT_ELEMENT.to_owned(), Some(text), Vec::new())
    }

    fn push(
        &mut self,
        parent: NodeId,
        element: String,
        text: Option<String>,
        attributes: Vec<(String, String)>,
    ) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            id,
            element,
            parent: Some(parent),
            children: Vec::new(),
            text,
            attributes,
        });
        self.nodes[parent.0].children.push(id);
        id
    }

    pub(crate) fn append_to_text(&mut self, id: NodeId, more: &str) {
        if let Some(text) = self.nodes[id.0].text.as_mut() {
            text.push_str(more);
        }
    }

    /// Copy of the subtree rooted at `id`.
    pub fn subtree(&self, id: NodeId) -> DocTree {
        let src = self.node(id);
        let mut out = DocTree::new(src.element.clone(), src.attributes.clone());
        out.nodes[0].text = src.text.clone();
        for &child in &src.children {
            out.graft(out.root, self, child);
        }
        out
    }

    /// Copies the subtree of `other` rooted at `node` under `parent`.
    pub(crate) fn graft(&mut self, parent: NodeId, other: &DocTree, node: NodeId) {
        let src = other.node(node);
        let id = self.push(
            parent,
            src.element.clone(),
            src.text.clone(),
            src.attributes.clone(),
        );
        for &child in &src.children {
            self.graft(id, other, child);
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = &Node> {
        self.nodes[id.0].children.iter().map(|c| &self.nodes[c.0])
    }

    /// Pre-order traversal starting at `from`.
    pub fn descendants(&self, from: NodeId) -> Descendants<'_> {
        Descendants {
            tree: self,
            stack: vec![from],
        }
    }

    /// Number of edges between the root and `id`.
    pub fn depth(&self, id: NodeId) -> usize {
        let mut depth = 0;
        let mut cur = self.node(id).parent;
        while let Some(p) = cur {
            depth += 1;
            cur = self.node(p).parent;
        }
        depth
    }

    /// Element names from the root down to `id`, inclusive.
    pub fn element_path(&self, id: NodeId) -> Vec<&str> {
        let mut path = Vec::new();
        let mut cur = Some(id);
        while let Some(n) = cur {
            let node = self.node(n);
            path.push(node.element.as_str());
            cur = node.parent;
        }
        path.reverse();
        path
    }

    /// Concatenated character data below `id`.
    pub fn text_content(&self, id: NodeId) -> String {
        self.descendants(id)
            .filter_map(|n| n.text.as_deref())
            .collect()
    }

    /// Serializes elements and text as markup. Attributes are written too,
    /// so the output re-parses to an isomorphic tree.
    pub fn to_markup(&self) -> String {
        let mut out = String::new();
        self.write_node(self.root, &mut out);
        out
    }

    fn write_node(&self, id: NodeId, out: &mut String) {
        let node = self.node(id);
        if let Some(text) = &node.text {
            escape_into(text, out);
            return;
        }
        out.push('<');
        out.push_str(&node.element);
        for (k, v) in &node.attributes {
            let _ = write!(out, " {k}=\"");
            escape_into(v, out);
            out.push('"');
        }
        if node.children.is_empty() {
            out.push_str("/>");
            return;
        }
        out.push('>');
        for &child in &node.children {
            self.write_node(child, out);
        }
        let _ = write!(out, "</{}>", node.element);
    }

    /// Structural validity: single root, consistent parent/child links,
    /// no cycles, text only on leaves.
    pub fn is_valid(&self) -> bool {
        let roots = self.nodes.iter().filter(|n| n.parent.is_none()).count();
        if roots != 1 || self.node(self.root).parent.is_some() {
            return false;
        }
        let edges: usize = self.nodes.iter().map(|n| n.children.len()).sum();
        if edges + 1 != self.nodes.len() {
            return false;
        }
        for node in &self.nodes {
            if node.text.is_some() && !node.children.is_empty() {
                return false;
            }
            if let Some(p) = node.parent {
                if !self.node(p).children.contains(&node.id) {
                    return false;
                }
            }
        }
        self.descendants(self.root).count() == self.nodes.len()
    }
}

fn escape_into(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
}

pub struct Descendants<'a> {
    tree: &'a DocTree,
    stack: Vec<NodeId>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a Node;

    fn next(&mut self) -> Option<&'a Node> {
        let id = self.stack.pop()?;
        let node = self.tree.node(id);
        self.stack.extend(node.children.iter().rev().copied());
        Some(node)
    }
}
