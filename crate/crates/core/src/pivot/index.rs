use std::collections::HashMap;

use super::{AnnotationDoc, CharSpan, Node, NodeItem, PivotError, Seg, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolved<'a> {
    Node(&'a Node),
    Token(&'a Token),
}

/// A token or a child node, in the order they occur under a parent.
#[derive(Debug, Clone, Copy)]
pub enum Daughter<'a> {
    /// Position in `AnnotationDoc::tokens`.
    Token(usize),
    Node(&'a Node),
}

/// Id lookup table over a document. Nodes inside every alternative are
/// indexed; the first occurrence of an id wins.
pub struct DocIndex<'a> {
    doc: &'a AnnotationDoc,
    nodes: HashMap<&'a str, &'a Node>,
    tokens: HashMap<&'a str, usize>,
}

impl<'a> DocIndex<'a> {
    pub fn new(doc: &'a AnnotationDoc) -> Self {
        let mut nodes = HashMap::new();
        fn walk<'a>(node: &'a Node, nodes: &mut HashMap<&'a str, &'a Node>) {
            if let Some(id) = node.id.as_deref() {
                nodes.entry(id).or_insert(node);
            }
            walk_items(&node.content, nodes);
        }
        fn walk_items<'a>(items: &'a [NodeItem], nodes: &mut HashMap<&'a str, &'a Node>) {
            for item in items {
                match item {
                    NodeItem::Node(n) => walk(n, nodes),
                    NodeItem::Brack(b) => walk_items(&b.items, nodes),
                    NodeItem::Alt(a) => a.alternatives.iter().for_each(|alt| walk_items(alt, nodes)),
                    _ => {}
                }
            }
        }
        walk(&doc.root, &mut nodes);
        let tokens = doc
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect();
        DocIndex { doc, nodes, tokens }
    }

    pub fn doc(&self) -> &'a AnnotationDoc {
        self.doc
    }

    pub fn resolve(&self, id: &str) -> Result<Resolved<'a>, PivotError> {
        if let Some(node) = self.nodes.get(id) {
            return Ok(Resolved::Node(node));
        }
        if let Some(&pos) = self.tokens.get(id) {
            return Ok(Resolved::Token(&self.doc.tokens[pos]));
        }
        Err(PivotError::UnknownId(id.to_string()))
    }

    pub fn node(&self, id: &str) -> Option<&'a Node> {
        self.nodes.get(id).copied()
    }

    pub fn token_position(&self, id: &str) -> Option<usize> {
        self.tokens.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id) || self.tokens.contains_key(id)
    }

    /// Follows `ref` links until a node without one; errors on cycles or
    /// dangling links.
    pub fn referent(&self, node: &'a Node) -> Result<&'a Node, PivotError> {
        let mut current = node;
        let mut steps = 0;
        while let Some(target) = current.reference.as_deref() {
            current = self
                .node(target)
                .ok_or_else(|| PivotError::UnknownId(target.to_string()))?;
            steps += 1;
            if steps > self.nodes.len() {
                return Err(PivotError::RefCycle(target.to_string()));
            }
        }
        Ok(current)
    }

    /// Token positions covered by a seg. Spans select the tokens lying
    /// entirely inside them.
    pub fn seg_tokens(&self, seg: &Seg) -> Option<Vec<usize>> {
        match seg {
            Seg::Token(id) => self.token_position(id).map(|p| vec![p]),
            Seg::Span(span) => Some(span_tokens(&self.doc.tokens, span)),
        }
    }

    /// Category of a node, falling back to the referent's for `ref` nodes.
    pub fn category(&self, node: &'a Node) -> Option<&'a str> {
        node.category()
            .or_else(|| self.referent(node).ok().and_then(|r| r.category()))
    }

    /// Token positions dominated by `node` (own segs and non-ref descendants),
    /// sorted and deduplicated.
    pub fn dominated_tokens(&self, node: &'a Node) -> Vec<usize> {
        let mut out = Vec::new();
        for d in daughters(self, node) {
            match d {
                Daughter::Token(p) => out.push(p),
                Daughter::Node(n) if n.reference.is_none() => out.extend(self.dominated_tokens(n)),
                Daughter::Node(_) => {}
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub(crate) fn span_tokens(tokens: &[Token], span: &CharSpan) -> Vec<usize> {
    let end = span.start + span.len;
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.char_start >= span.start && t.char_end() <= end)
        .map(|(i, _)| i)
        .collect()
}

/// Token and node daughters of `node` in the default reading. Segs that
/// resolve to no token are skipped.
pub fn daughters<'a>(index: &DocIndex<'a>, node: &'a Node) -> Vec<Daughter<'a>> {
    let mut out = Vec::new();
    for item in node.items() {
        match item {
            NodeItem::Seg(seg) => {
                if let Some(positions) = index.seg_tokens(seg) {
                    out.extend(positions.into_iter().map(Daughter::Token));
                }
            }
            NodeItem::Node(n) => out.push(Daughter::Node(n)),
            _ => {}
        }
    }
    out
}
