use std::collections::HashMap;

use super::{AnnotationDoc, Node, NodeItem, Rel, Seg};

impl AnnotationDoc {
    /// Copy with nodes renamed `s0, s1, ...` in document preorder (anonymous
    /// nodes included, alternatives in order) and tokens renamed `w1, w2, ...`
    /// by position; every reference is remapped.
    pub fn canonical(&self) -> AnnotationDoc {
        let mut map: HashMap<String, String> = HashMap::new();
        for (i, tok) in self.tokens.iter().enumerate() {
            map.entry(tok.id.clone()).or_insert_with(|| format!("w{}", i + 1));
        }
        let mut counter = 0usize;
        let root = rename_node(&self.root, &mut counter, &mut map);
        // Second pass: references may point forward in document order.
        let root = remap_node(&root, &map);
        let tokens = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut t = t.clone();
                t.id = format!("w{}", i + 1);
                t
            })
            .collect();
        AnnotationDoc {
            doc_id: String::new(),
            base_uri: self.base_uri.clone(),
            tokens,
            root,
        }
    }
}

/// Deep equality up to consistent id renaming (document ids are ignored).
pub fn structurally_eq(a: &AnnotationDoc, b: &AnnotationDoc) -> bool {
    a.canonical() == b.canonical()
}

fn rename_node(node: &Node, counter: &mut usize, map: &mut HashMap<String, String>) -> Node {
    let fresh = format!("s{counter}");
    *counter += 1;
    if let Some(id) = &node.id {
        map.entry(id.clone()).or_insert_with(|| fresh.clone());
    }
    Node {
        id: Some(fresh),
        reference: node.reference.clone(),
        content: rename_items(&node.content, counter, map),
    }
}

fn rename_items(items: &[NodeItem], counter: &mut usize, map: &mut HashMap<String, String>) -> Vec<NodeItem> {
    items
        .iter()
        .map(|item| match item {
            NodeItem::Node(n) => NodeItem::Node(rename_node(n, counter, map)),
            NodeItem::Brack(b) => NodeItem::Brack(super::Brack {
                items: rename_items(&b.items, counter, map),
            }),
            NodeItem::Alt(a) => NodeItem::Alt(super::Alt {
                alternatives: a
                    .alternatives
                    .iter()
                    .map(|alt| rename_items(alt, counter, map))
                    .collect(),
            }),
            other => other.clone(),
        })
        .collect()
}

fn remap(id: &str, map: &HashMap<String, String>) -> String {
    map.get(id).cloned().unwrap_or_else(|| id.to_string())
}

fn remap_node(node: &Node, map: &HashMap<String, String>) -> Node {
    Node {
        id: node.id.clone(),
        reference: node.reference.as_deref().map(|r| remap(r, map)),
        content: remap_items(&node.content, map),
    }
}

fn remap_items(items: &[NodeItem], map: &HashMap<String, String>) -> Vec<NodeItem> {
    items
        .iter()
        .map(|item| match item {
            NodeItem::Node(n) => NodeItem::Node(remap_node(n, map)),
            NodeItem::Rel(r) => NodeItem::Rel(Rel {
                label: r.label.clone(),
                head: remap(&r.head, map),
                dependent: r.dependent.as_deref().map(|d| remap(d, map)),
                introducer: r.introducer.as_deref().map(|d| remap(d, map)),
                initial: r.initial.clone(),
            }),
            NodeItem::Seg(Seg::Token(t)) => NodeItem::Seg(Seg::Token(remap(t, map))),
            NodeItem::Brack(b) => NodeItem::Brack(super::Brack {
                items: remap_items(&b.items, map),
            }),
            NodeItem::Alt(a) => NodeItem::Alt(super::Alt {
                alternatives: a.alternatives.iter().map(|alt| remap_items(alt, map)).collect(),
            }),
            other => other.clone(),
        })
        .collect()
}
