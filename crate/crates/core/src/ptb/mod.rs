//! Penn-Treebank bracketed trees: parsing, rendering and conversion to and
//! from the pivot.

mod convert;
mod parse;

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

pub use convert::{pivot_to_ptb, ptb_to_pivot, EncodingStyle, PunctuationPolicy, SentenceText, DEFAULT_SPAN_PATH};
pub use parse::{parse_ptb, parse_ptb_all, PtbReader};

use crate::pivot::PivotError;
use crate::transduce::TransduceError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PtbError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("trace index {0} matches no labeled constituent")]
    UnresolvedCoindex(u32),
    #[error("co-index {0} is carried by more than one constituent")]
    DuplicateCoindex(u32),
    #[error("leaf `{0}` not found in the sentence text")]
    LeafNotFound(String),
    #[error("node `{0}` cannot be written as a bracketed constituent")]
    NotConstituency(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Pivot(#[from] PivotError),
    #[error(transparent)]
    Transduce(#[from] TransduceError),
}

/// A bracketed tree. Internal labels are kept raw; see [`split_label`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PtbTree {
    Internal { label: String, children: Vec<PtbTree> },
    Leaf(String),
}

/// `CAT-TAG1-TAG2-n` split into its parts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PtbLabel {
    pub category: String,
    pub function_tags: Vec<String>,
    pub coindex: Option<u32>,
}

impl PtbLabel {
    pub fn render(&self) -> String {
        let mut out = self.category.clone();
        for t in &self.function_tags {
            out.push('-');
            out.push_str(t);
        }
        if let Some(n) = self.coindex {
            let _ = write!(out, "-{n}");
        }
        out
    }
}

/// Hyphen-separated: the first segment is the category, a final all-digit
/// segment is the co-index and the rest are function tags. Labels written as
/// `-NAME-` (such as `-NONE-`) are kept whole.
pub fn split_label(raw: &str) -> PtbLabel {
    if raw.len() > 1 && raw.starts_with('-') && raw.ends_with('-') {
        return PtbLabel {
            category: raw.to_string(),
            ..PtbLabel::default()
        };
    }
    let mut parts: Vec<&str> = raw.split('-').collect();
    let category = parts.remove(0).to_string();
    let mut coindex = None;
    if let Some(last) = parts.last() {
        if !last.is_empty() && last.bytes().all(|b| b.is_ascii_digit()) {
            coindex = last.parse().ok();
            if coindex.is_some() {
                parts.pop();
            }
        }
    }
    PtbLabel {
        category,
        function_tags: parts.into_iter().filter(|p| !p.is_empty()).map(str::to_string).collect(),
        coindex,
    }
}

/// A null-element leaf (`*`, `*-1`, `*T*-2`, `0`) split into surface form and
/// optional index.
pub(crate) fn null_element(text: &str) -> Option<(&str, Option<u32>)> {
    if !(text.starts_with('*') || text == "0" || text.starts_with("0-")) {
        return None;
    }
    if let Some((base, idx)) = text.rsplit_once('-') {
        if !base.is_empty() && !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(n) = idx.parse() {
                return Some((base, Some(n)));
            }
        }
    }
    Some((text, None))
}

pub(crate) fn is_punctuation(text: &str) -> bool {
    !text.is_empty()
        && null_element(text).is_none()
        && text.chars().all(|c| matches!(c, ',' | '.' | ':' | ';' | '?' | '!' | '`' | '\'' | '"' | '-'))
}

impl PtbTree {
    pub fn leaf(text: impl Into<String>) -> Self {
        PtbTree::Leaf(text.into())
    }

    pub fn node(label: impl Into<String>, children: Vec<PtbTree>) -> Self {
        PtbTree::Internal {
            label: label.into(),
            children,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            PtbTree::Internal { label, .. } => Some(label),
            PtbTree::Leaf(_) => None,
        }
    }

    pub fn children(&self) -> &[PtbTree] {
        match self {
            PtbTree::Internal { children, .. } => children,
            PtbTree::Leaf(_) => &[],
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, PtbTree::Leaf(_))
    }

    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn walk<'a>(t: &'a PtbTree, out: &mut Vec<&'a str>) {
            match t {
                PtbTree::Leaf(s) => out.push(s),
                PtbTree::Internal { children, .. } => children.iter().for_each(|c| walk(c, out)),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn internal_count(&self) -> usize {
        match self {
            PtbTree::Leaf(_) => 0,
            PtbTree::Internal { children, .. } => 1 + children.iter().map(PtbTree::internal_count).sum::<usize>(),
        }
    }

    /// Single-line bracketed form, without the outer wrapping parentheses.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            PtbTree::Leaf(s) => out.push_str(s),
            PtbTree::Internal { label, children } => {
                out.push('(');
                out.push_str(label);
                for c in children {
                    out.push(' ');
                    c.render_into(out);
                }
                out.push(')');
            }
        }
    }

    /// Treebank layout: `((S ...))`, one phrasal daughter per line, words
    /// kept on their parent's line.
    pub fn render_pretty(&self) -> String {
        let mut out = String::from("(");
        self.pretty_into(&mut out, 1);
        out.push_str(")\n");
        out
    }

    fn pretty_into(&self, out: &mut String, indent: usize) {
        match self {
            PtbTree::Leaf(s) => out.push_str(s),
            PtbTree::Internal { label, children } => {
                out.push('(');
                out.push_str(label);
                for c in children {
                    if c.is_leaf() {
                        out.push(' ');
                        c.pretty_into(out, indent);
                    } else {
                        out.push('\n');
                        out.push_str(&" ".repeat(indent * 2 + 2));
                        c.pretty_into(out, indent + 1);
                    }
                }
                out.push(')');
            }
        }
    }

    /// Renumbers co-indices 1, 2, ... in preorder of the constituents
    /// carrying them, rewriting trace indices to match. Unmatched trace
    /// indices are left alone.
    pub fn renumber_coindices(&self) -> PtbTree {
        let mut map = HashMap::new();
        fn collect(t: &PtbTree, map: &mut HashMap<u32, u32>) {
            if let PtbTree::Internal { label, children } = t {
                if let Some(n) = split_label(label).coindex {
                    let next = map.len() as u32 + 1;
                    map.entry(n).or_insert(next);
                }
                children.iter().for_each(|c| collect(c, map));
            }
        }
        collect(self, &mut map);
        fn rewrite(t: &PtbTree, map: &HashMap<u32, u32>) -> PtbTree {
            match t {
                PtbTree::Leaf(s) => match null_element(s) {
                    Some((base, Some(n))) => match map.get(&n) {
                        Some(m) => PtbTree::Leaf(format!("{base}-{m}")),
                        None => t.clone(),
                    },
                    _ => t.clone(),
                },
                PtbTree::Internal { label, children } => {
                    let mut l = split_label(label);
                    let relabel = match l.coindex {
                        Some(n) if !label.starts_with('-') => {
                            l.coindex = map.get(&n).copied();
                            l.render()
                        }
                        _ => label.clone(),
                    };
                    PtbTree::Internal {
                        label: relabel,
                        children: children.iter().map(|c| rewrite(c, map)).collect(),
                    }
                }
            }
        }
        rewrite(self, &map)
    }
}

impl fmt::Display for PtbTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
