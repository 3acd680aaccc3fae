//! Head finding over constituency pivots and conversion to flat dependency
//! pivots.

mod rules;

use std::collections::HashSet;

use thiserror::Error;

use crate::pivot::{
    daughters, AnnotationDoc, Daughter, DocIndex, Node, NodeItem, PivotError, Rel, Resolved, Seg,
};
use crate::registry::{Dialect, RegistryError};

pub use rules::{DaughterKind, Direction, HeadEntry, HeadPref, HeadRules, ImplicitObject, Position, RelationEntry, Target};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransduceError {
    #[error("head rules line {line}: {message}")]
    Rules { line: usize, message: String },
    #[error("node `{0}` dominates no token")]
    NoToken(String),
    #[error(transparent)]
    Pivot(#[from] PivotError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DepOptions {
    /// Keep each constituent as a child node carrying its category and the
    /// tokens it spans.
    pub keep_features: bool,
}

/// Daughters that reach at least one token: words, nodes dominating words
/// and ref nodes whose referent does.
pub fn contentful_daughters<'a>(index: &DocIndex<'a>, node: &'a Node) -> Vec<Daughter<'a>> {
    daughters(index, node)
        .into_iter()
        .filter(|d| match d {
            Daughter::Token(_) => true,
            Daughter::Node(n) => match index.referent(n) {
                Ok(r) => !index.dominated_tokens(r).is_empty(),
                Err(_) => false,
            },
        })
        .collect()
}

fn kind_of<'a>(index: &DocIndex<'a>, d: &Daughter<'a>) -> DaughterKind<'a> {
    match d {
        Daughter::Token(_) => DaughterKind::Token,
        Daughter::Node(n) => DaughterKind::Node(index.category(n)),
    }
}

/// The head daughter among the contentful daughters, with its index in that
/// list.
pub fn head_daughter<'a>(
    index: &DocIndex<'a>,
    node: &'a Node,
    rules: &HeadRules,
) -> Option<(usize, Daughter<'a>, Vec<Daughter<'a>>)> {
    let ds = contentful_daughters(index, node);
    let kinds: Vec<_> = ds.iter().map(|d| kind_of(index, d)).collect();
    let h = rules.select_head(index.category(node), &kinds)?;
    Some((h, ds[h], ds))
}

/// The head daughter of `node`.
pub fn head_of<'a>(index: &DocIndex<'a>, node: &'a Node, rules: &HeadRules) -> Option<Daughter<'a>> {
    head_daughter(index, node, rules).map(|(_, d, _)| d)
}

/// Token position reached by following heads down from `node`; ref nodes
/// resolve through their referent.
pub fn lexical_head<'a>(index: &DocIndex<'a>, node: &'a Node, rules: &HeadRules) -> Result<usize, TransduceError> {
    let mut current = node;
    let limit = index.doc().tokens.len() + index.doc().root.preorder().len() + 1;
    for _ in 0..limit {
        current = index.referent(current)?;
        match head_of(index, current, rules) {
            Some(Daughter::Token(p)) => return Ok(p),
            Some(Daughter::Node(n)) => current = n,
            None => return Err(TransduceError::NoToken(current.id_str().to_string())),
        }
    }
    Err(TransduceError::NoToken(node.id_str().to_string()))
}

/// Lexical head of whatever `id` names: a token or a node.
pub fn lexical_head_of_id(index: &DocIndex<'_>, id: &str, rules: &HeadRules) -> Result<usize, TransduceError> {
    match index.resolve(id)? {
        Resolved::Token(_) => Ok(index.token_position(id).expect("resolved token")),
        Resolved::Node(n) => lexical_head(index, n, rules),
    }
}

/// The node a function tag on a daughter of `parent` attaches to: descend
/// from `parent` along head daughters to the lowest node whose own head is a
/// word.
pub fn tag_anchor<'a>(index: &DocIndex<'a>, parent: &'a Node, rules: &HeadRules) -> &'a Node {
    let mut current = parent;
    let mut seen = HashSet::new();
    while seen.insert(current as *const Node) {
        match head_of(index, current, rules) {
            Some(Daughter::Node(n)) if n.reference.is_none() => current = n,
            _ => break,
        }
    }
    current
}

/// First introducer word on the head path of `node`: a word before the head
/// daughter of a constituent whose category takes introducers.
pub fn introducer_of<'a>(index: &DocIndex<'a>, node: &'a Node, rules: &HeadRules) -> Option<usize> {
    if node.reference.is_some() {
        return None;
    }
    let mut current = node;
    let mut seen = HashSet::new();
    while seen.insert(current as *const Node) {
        let (h, hd, ds) = head_daughter(index, current, rules)?;
        if rules.has_introducers(index.category(current)) {
            if let Some(p) = ds[..h].iter().find_map(|d| match d {
                Daughter::Token(p) => Some(*p),
                Daughter::Node(_) => None,
            }) {
                return Some(p);
            }
        }
        match hd {
            Daughter::Node(n) if n.reference.is_none() => current = n,
            _ => return None,
        }
    }
    None
}

/// Converts a constituency pivot into a flat dependency pivot: one root with
/// a rel per non-head, non-introducer daughter, sorted by head then
/// dependent position. Rels that already name a dependent pass through.
pub fn to_dependency(
    doc: &AnnotationDoc,
    rules: &HeadRules,
    dialect: &Dialect,
    options: DepOptions,
) -> Result<AnnotationDoc, TransduceError> {
    let index = doc.index();
    let tok = |p: usize| doc.tokens[p].id.clone();
    // (sort key, rel)
    let mut out: Vec<((usize, usize), Rel)> = Vec::new();
    let mut kept = Vec::new();

    for node in doc.root.preorder() {
        for r in node.rels() {
            if r.dependent.is_some() {
                let key = (
                    lexical_head_of_id(&index, &r.head, rules).unwrap_or(usize::MAX),
                    r.dependent
                        .as_deref()
                        .and_then(|d| lexical_head_of_id(&index, d, rules).ok())
                        .unwrap_or(usize::MAX),
                );
                out.push((key, r.clone()));
            }
        }
        if node.reference.is_some() {
            continue;
        }
        let Some((h, hd, ds)) = head_daughter(&index, node, rules) else {
            continue;
        };
        let cat = index.category(node);
        if let (true, Some(c)) = (options.keep_features, cat) {
            let mut kept_node = Node::anonymous().with_cat(c);
            for p in index.dominated_tokens(node) {
                kept_node = kept_node.with(NodeItem::Seg(Seg::Token(tok(p))));
            }
            kept.push(kept_node);
        }
        let head_tok = match hd {
            Daughter::Token(p) => p,
            Daughter::Node(n) => lexical_head(&index, n, rules)?,
        };
        let introducers: Vec<usize> = if rules.has_introducers(cat) {
            ds[..h]
                .iter()
                .filter_map(|d| match d {
                    Daughter::Token(p) => Some(*p),
                    Daughter::Node(_) => None,
                })
                .collect()
        } else {
            Vec::new()
        };

        for (i, d) in ds.iter().enumerate() {
            match d {
                Daughter::Token(p) if i != h => {
                    if introducers.contains(p) {
                        continue;
                    }
                    if let Some(label) = rules.relation_label(cat, DaughterKind::Token, i < h) {
                        out.push(((head_tok, *p), Rel::new(label, tok(head_tok)).with_dependent(tok(*p))));
                    }
                }
                Daughter::Token(_) => {}
                Daughter::Node(c) => {
                    let dep = lexical_head(&index, c, rules)?;
                    let explicit: Vec<&Rel> = c.rels().into_iter().filter(|r| r.dependent.is_none()).collect();
                    if i == h {
                        for r in explicit {
                            let head = lexical_head_of_id(&index, &r.head, rules)?;
                            if head != dep {
                                out.push(((head, dep), make_rel(r, tok(head), tok(dep), None)));
                            }
                        }
                        continue;
                    }
                    let intro = introducer_of(&index, c, rules).map(tok);
                    if explicit.is_empty() {
                        if let Some(label) = rules.relation_label(cat, kind_of(&index, d), i < h) {
                            let mut rel = Rel::new(label, tok(head_tok)).with_dependent(tok(dep));
                            rel.introducer = intro;
                            out.push(((head_tok, dep), rel));
                        }
                    } else {
                        for r in explicit {
                            let head = lexical_head_of_id(&index, &r.head, rules)?;
                            out.push(((head, dep), make_rel(r, tok(head), tok(dep), intro.clone())));
                        }
                    }
                }
            }
        }
    }

    for (_, r) in &out {
        dialect.normalize(&r.label)?;
    }
    out.sort_by_key(|(k, _)| *k);
    let mut root = Node::anonymous();
    for (_, r) in out {
        root.content.push(NodeItem::Rel(r));
    }
    for n in kept {
        root.content.push(NodeItem::Node(n));
    }
    Ok(AnnotationDoc {
        doc_id: doc.doc_id.clone(),
        base_uri: doc.base_uri.clone(),
        tokens: doc.tokens.clone(),
        root,
    })
}

fn make_rel(src: &Rel, head: String, dep: String, intro: Option<String>) -> Rel {
    Rel {
        label: src.label.clone(),
        head,
        dependent: Some(dep),
        introducer: intro,
        initial: src.initial.clone(),
    }
}
