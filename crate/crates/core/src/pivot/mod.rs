//! The pivot representation: a tree of untyped structure nodes carrying
//! features, explicit relations, stand-off anchors, bracketing and
//! alternatives. Every reader in the crate produces an [`AnnotationDoc`] and
//! every writer or evaluator consumes one.

mod canonical;
mod index;
mod text;
mod validate;

use thiserror::Error;

pub use canonical::structurally_eq;
pub use index::{daughters, Daughter, DocIndex, Resolved};
pub use text::{covered_text, primary_text, tokens_from_spans};
pub use validate::{validate_doc, Violation, ViolationKind};

/// Feature key holding the syntactic category of a node.
pub const CAT: &str = "CAT";
/// Feature key recording the surface form of a null element (`*T*`, `0`, ...).
pub const NULL: &str = "NULL";
/// Feature key recording a co-index that no trace refers to.
pub const COINDEX: &str = "COINDEX";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PivotError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("dangling anchor `{anchor}` on node {node}")]
    DanglingAnchor { node: String, anchor: String },
    #[error("reference cycle through `{0}`")]
    RefCycle(String),
}

/// One annotated sentence: primary-data tokens plus the annotation tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationDoc {
    pub doc_id: String,
    pub base_uri: Option<String>,
    pub tokens: Vec<Token>,
    pub root: Node,
}

/// A word of the primary data. Offsets are 1-based and count characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub id: String,
    pub text: String,
    pub char_start: usize,
    pub char_len: usize,
}

impl Token {
    pub fn new(id: impl Into<String>, text: impl Into<String>, char_start: usize) -> Self {
        let text = text.into();
        let char_len = text.chars().count();
        Token {
            id: id.into(),
            text,
            char_start,
            char_len,
        }
    }

    /// One past the last character covered, 1-based.
    pub fn char_end(&self) -> usize {
        self.char_start + self.char_len
    }
}

/// Tokens `w1..wn` for a sentence given as words separated by single spaces.
pub fn tokens_from_words<S: AsRef<str>>(words: &[S]) -> Vec<Token> {
    let mut start = 1;
    words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let tok = Token::new(format!("w{}", i + 1), w.as_ref(), start);
            start = tok.char_end() + 1;
            tok
        })
        .collect()
}

/// Tokens for the whitespace-separated words of `text`, keeping true offsets.
pub fn tokens_from_text(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, String)> = None;
    for (pos, ch) in text.chars().enumerate() {
        if ch.is_whitespace() {
            if let Some((start, word)) = current.take() {
                tokens.push(Token::new(format!("w{}", tokens.len() + 1), word, start));
            }
        } else {
            current.get_or_insert_with(|| (pos + 1, String::new())).1.push(ch);
        }
    }
    if let Some((start, word)) = current {
        tokens.push(Token::new(format!("w{}", tokens.len() + 1), word, start));
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Node {
    pub id: Option<String>,
    /// Shared-structure reference: the node denotes the referenced material.
    pub reference: Option<String>,
    pub content: Vec<NodeItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeItem {
    Feat(Feat),
    Rel(Rel),
    Seg(Seg),
    Brack(Brack),
    Alt(Alt),
    Node(Node),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feat {
    pub key: String,
    pub value: FeatValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatValue {
    Inline(String),
    /// Opaque pointer to an object in another document; never dereferenced.
    Target(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rel {
    pub label: String,
    pub head: String,
    pub dependent: Option<String>,
    pub introducer: Option<String>,
    /// Thematic or semantic role; stored, not interpreted.
    pub initial: Option<String>,
}

impl Rel {
    pub fn new(label: impl Into<String>, head: impl Into<String>) -> Self {
        Rel {
            label: label.into(),
            head: head.into(),
            dependent: None,
            introducer: None,
            initial: None,
        }
    }

    pub fn with_dependent(mut self, dependent: impl Into<String>) -> Self {
        self.dependent = Some(dependent.into());
        self
    }

    pub fn with_introducer(mut self, introducer: impl Into<String>) -> Self {
        self.introducer = Some(introducer.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seg {
    Token(String),
    Span(CharSpan),
}

/// `xptr(substring(path,start,len))` with a 1-based character start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharSpan {
    pub path: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Brack {
    pub items: Vec<NodeItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alt {
    pub alternatives: Vec<Vec<NodeItem>>,
}

impl Node {
    pub fn new(id: impl Into<String>) -> Self {
        Node {
            id: Some(id.into()),
            ..Node::default()
        }
    }

    pub fn anonymous() -> Self {
        Node::default()
    }

    pub fn with_ref(mut self, target: impl Into<String>) -> Self {
        self.reference = Some(target.into());
        self
    }

    pub fn with(mut self, item: NodeItem) -> Self {
        self.content.push(item);
        self
    }

    pub fn with_cat(self, cat: impl Into<String>) -> Self {
        self.with(NodeItem::Feat(Feat {
            key: CAT.to_string(),
            value: FeatValue::Inline(cat.into()),
        }))
    }

    pub fn with_rel(self, rel: Rel) -> Self {
        self.with(NodeItem::Rel(rel))
    }

    pub fn with_token(self, token_id: impl Into<String>) -> Self {
        self.with(NodeItem::Seg(Seg::Token(token_id.into())))
    }

    pub fn with_child(self, child: Node) -> Self {
        self.with(NodeItem::Node(child))
    }

    pub fn id_str(&self) -> &str {
        self.id.as_deref().unwrap_or("")
    }

    /// Items of the default reading: brackets are flattened and each
    /// alternative set contributes its first alternative.
    pub fn items(&self) -> Vec<&NodeItem> {
        let mut out = Vec::new();
        flatten_items(&self.content, &mut out);
        out
    }

    /// Inline value of the first feature with this key in the default reading.
    pub fn feat(&self, key: &str) -> Option<&str> {
        self.items().into_iter().find_map(|item| match item {
            NodeItem::Feat(Feat {
                key: k,
                value: FeatValue::Inline(v),
            }) if k == key => Some(v.as_str()),
            _ => None,
        })
    }

    pub fn category(&self) -> Option<&str> {
        self.feat(CAT)
    }

    pub fn rels(&self) -> Vec<&Rel> {
        self.items()
            .into_iter()
            .filter_map(|item| match item {
                NodeItem::Rel(r) => Some(r),
                _ => None,
            })
            .collect()
    }

    pub fn child_nodes(&self) -> Vec<&Node> {
        self.items()
            .into_iter()
            .filter_map(|item| match item {
                NodeItem::Node(n) => Some(n),
                _ => None,
            })
            .collect()
    }

    /// Preorder walk over this node and every descendant in the default reading.
    pub fn preorder(&self) -> Vec<&Node> {
        fn walk<'a>(node: &'a Node, out: &mut Vec<&'a Node>) {
            out.push(node);
            for child in node.child_nodes() {
                walk(child, out);
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

fn flatten_items<'a>(items: &'a [NodeItem], out: &mut Vec<&'a NodeItem>) {
    for item in items {
        match item {
            NodeItem::Brack(b) => flatten_items(&b.items, out),
            NodeItem::Alt(a) => {
                if let Some(first) = a.alternatives.first() {
                    flatten_items(first, out);
                }
            }
            other => out.push(other),
        }
    }
}

impl AnnotationDoc {
    pub fn new(doc_id: impl Into<String>, tokens: Vec<Token>, root: Node) -> Self {
        AnnotationDoc {
            doc_id: doc_id.into(),
            base_uri: None,
            tokens,
            root,
        }
    }

    pub fn with_base(mut self, base: impl Into<String>) -> Self {
        self.base_uri = Some(base.into());
        self
    }

    pub fn index(&self) -> DocIndex<'_> {
        DocIndex::new(self)
    }

    /// The unique node or token carrying `id`.
    pub fn resolve(&self, id: &str) -> Result<Resolved<'_>, PivotError> {
        self.index().resolve(id)
    }

    /// Number of distinct readings: the largest alternative count of any `<alt>`.
    pub fn reading_count(&self) -> usize {
        fn walk(items: &[NodeItem]) -> usize {
            items
                .iter()
                .map(|item| match item {
                    NodeItem::Node(n) => walk(&n.content),
                    NodeItem::Brack(b) => walk(&b.items),
                    NodeItem::Alt(a) => a
                        .alternatives
                        .iter()
                        .map(|alt| walk(alt))
                        .max()
                        .unwrap_or(1)
                        .max(a.alternatives.len()),
                    _ => 1,
                })
                .max()
                .unwrap_or(1)
        }
        walk(&self.root.content).max(1)
    }

    /// Copy of the document where every `<alt>` is replaced by its
    /// alternative `min(k, len - 1)`.
    pub fn reading(&self, k: usize) -> AnnotationDoc {
        fn resolve_items(items: &[NodeItem], k: usize) -> Vec<NodeItem> {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    NodeItem::Alt(a) if !a.alternatives.is_empty() => {
                        let pick = k.min(a.alternatives.len() - 1);
                        out.extend(resolve_items(&a.alternatives[pick], k));
                    }
                    NodeItem::Alt(_) => {}
                    NodeItem::Brack(b) => out.push(NodeItem::Brack(Brack {
                        items: resolve_items(&b.items, k),
                    })),
                    NodeItem::Node(n) => out.push(NodeItem::Node(Node {
                        id: n.id.clone(),
                        reference: n.reference.clone(),
                        content: resolve_items(&n.content, k),
                    })),
                    other => out.push(other.clone()),
                }
            }
            out
        }
        AnnotationDoc {
            doc_id: self.doc_id.clone(),
            base_uri: self.base_uri.clone(),
            tokens: self.tokens.clone(),
            root: Node {
                id: self.root.id.clone(),
                reference: self.root.reference.clone(),
                content: resolve_items(&self.root.content, k),
            },
        }
    }

    /// Every relation in the default reading, in document order.
    pub fn all_rels(&self) -> Vec<&Rel> {
        self.root
            .preorder()
            .into_iter()
            .flat_map(|n| n.rels())
            .collect()
    }

    /// Position of a token id in `tokens`.
    pub fn token_position(&self, id: &str) -> Option<usize> {
        self.tokens.iter().position(|t| t.id == id)
    }
}
