use std::collections::HashSet;
use std::fmt;

use super::{AnnotationDoc, DocIndex, Node, NodeItem, Seg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    EmptyId,
    DuplicateId,
    /// A node nested inside a node carrying the same id.
    Cycle,
    DanglingReference,
    RefCycle,
    RefWithSeg,
    EmptyLabel,
    BadSpan,
    TokenOrder,
    TokenLength,
    EmptyAlt,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::EmptyId => "empty-id",
            ViolationKind::DuplicateId => "duplicate-id",
            ViolationKind::Cycle => "acyclicity",
            ViolationKind::DanglingReference => "dangling-reference",
            ViolationKind::RefCycle => "ref-cycle",
            ViolationKind::RefWithSeg => "ref-with-seg",
            ViolationKind::EmptyLabel => "empty-label",
            ViolationKind::BadSpan => "bad-span",
            ViolationKind::TokenOrder => "token-order",
            ViolationKind::TokenLength => "token-length",
            ViolationKind::EmptyAlt => "empty-alt",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Id of the offending node, token or referenced id.
    pub id: String,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.kind, self.id, self.detail)
    }
}

/// Checks every structural invariant of the pivot. An empty result means the
/// document is well-formed.
pub fn validate_doc(doc: &AnnotationDoc) -> Vec<Violation> {
    let mut out = Vec::new();
    check_tokens(doc, &mut out);

    let mut seen: HashSet<String> = doc.tokens.iter().map(|t| t.id.clone()).collect();
    let mut ancestors = Vec::new();
    collect_ids(&doc.root, &mut seen, &mut ancestors, &mut out);

    let index = doc.index();
    check_node(&index, &doc.root, &mut out);
    out
}

fn violation(out: &mut Vec<Violation>, id: &str, kind: ViolationKind, detail: impl Into<String>) {
    out.push(Violation {
        id: id.to_string(),
        kind,
        detail: detail.into(),
    });
}

fn check_tokens(doc: &AnnotationDoc, out: &mut Vec<Violation>) {
    let mut seen = HashSet::new();
    let mut prev_end = 0;
    for tok in &doc.tokens {
        if tok.id.is_empty() {
            violation(out, "", ViolationKind::EmptyId, format!("token `{}`", tok.text));
        } else if !seen.insert(tok.id.as_str()) {
            violation(out, &tok.id, ViolationKind::DuplicateId, "token id repeated");
        }
        if tok.char_start == 0 || tok.char_len == 0 {
            violation(out, &tok.id, ViolationKind::TokenLength, "start and length must be >= 1");
        }
        if tok.char_start < prev_end.max(1) {
            violation(out, &tok.id, ViolationKind::TokenOrder, "tokens overlap or are out of order");
        }
        prev_end = tok.char_end();
    }
}

// Alternatives of one <alt> may reuse ids among themselves but not with
// material outside the <alt>.
fn collect_ids(node: &Node, seen: &mut HashSet<String>, ancestors: &mut Vec<String>, out: &mut Vec<Violation>) {
    let mut pushed = false;
    match node.id.as_deref() {
        Some("") => violation(out, "", ViolationKind::EmptyId, "node id is empty"),
        Some(id) => {
            if ancestors.iter().any(|a| a == id) {
                violation(out, id, ViolationKind::Cycle, "node contains itself as a descendant");
            } else if !seen.insert(id.to_string()) {
                violation(out, id, ViolationKind::DuplicateId, "node id repeated");
            }
            ancestors.push(id.to_string());
            pushed = true;
        }
        None => {}
    }
    collect_item_ids(&node.content, seen, ancestors, out);
    if pushed {
        ancestors.pop();
    }
}

fn collect_item_ids(items: &[NodeItem], seen: &mut HashSet<String>, ancestors: &mut Vec<String>, out: &mut Vec<Violation>) {
    for item in items {
        match item {
            NodeItem::Node(n) => collect_ids(n, seen, ancestors, out),
            NodeItem::Brack(b) => collect_item_ids(&b.items, seen, ancestors, out),
            NodeItem::Alt(a) => {
                let mut union = HashSet::new();
                for alt in &a.alternatives {
                    let mut scoped = seen.clone();
                    collect_item_ids(alt, &mut scoped, ancestors, out);
                    union.extend(scoped.difference(seen).cloned().collect::<Vec<_>>());
                }
                seen.extend(union);
            }
            _ => {}
        }
    }
}

fn check_node(index: &DocIndex<'_>, node: &Node, out: &mut Vec<Violation>) {
    let id = node.id_str();
    if let Some(target) = node.reference.as_deref() {
        if !index.contains(target) {
            violation(out, target, ViolationKind::DanglingReference, format!("ref on node `{id}`"));
        } else if index.referent(node).is_err() {
            violation(out, target, ViolationKind::RefCycle, format!("ref chain from node `{id}`"));
        }
    }
    check_items(index, node, &node.content, out);
}

fn check_items(index: &DocIndex<'_>, owner: &Node, items: &[NodeItem], out: &mut Vec<Violation>) {
    let owner_id = owner.id_str();
    let dangling = |out: &mut Vec<Violation>, target: &str, what: &str| {
        if !index.contains(target) {
            violation(out, target, ViolationKind::DanglingReference, format!("{what} in node `{owner_id}`"));
        }
    };
    for item in items {
        match item {
            NodeItem::Feat(f) => {
                if f.key.is_empty() {
                    violation(out, owner_id, ViolationKind::EmptyLabel, "feat without type");
                }
                // Feat targets may point into other documents and stay opaque.
            }
            NodeItem::Rel(r) => {
                if r.label.is_empty() {
                    violation(out, owner_id, ViolationKind::EmptyLabel, "rel without type");
                }
                dangling(out, &r.head, "rel head");
                for (what, target) in [("rel dependent", &r.dependent), ("rel introducer", &r.introducer)] {
                    if let Some(t) = target {
                        dangling(out, t, what);
                    }
                }
            }
            NodeItem::Seg(seg) => {
                if owner.reference.is_some() {
                    violation(out, owner_id, ViolationKind::RefWithSeg, "ref node carries its own seg");
                }
                match seg {
                    Seg::Token(t) => {
                        if index.token_position(t).is_none() {
                            violation(out, t, ViolationKind::DanglingReference, format!("seg in node `{owner_id}`"));
                        }
                    }
                    Seg::Span(s) if s.start == 0 || s.len == 0 => {
                        violation(out, owner_id, ViolationKind::BadSpan, format!("substring({},{})", s.start, s.len));
                    }
                    Seg::Span(_) => {}
                }
            }
            NodeItem::Brack(b) => check_items(index, owner, &b.items, out),
            NodeItem::Alt(a) => {
                if a.alternatives.is_empty() {
                    violation(out, owner_id, ViolationKind::EmptyAlt, "alt without alternatives");
                }
                for alt in &a.alternatives {
                    check_items(index, owner, alt, out);
                }
            }
            NodeItem::Node(child) => check_node(index, child, out),
        }
    }
}
