use std::collections::{HashMap, HashSet};

use super::{is_punctuation, null_element, split_label, PtbError, PtbLabel, PtbTree};
use crate::pivot::{
    tokens_from_words, AnnotationDoc, CharSpan, Daughter, DocIndex, Feat, FeatValue, Node, NodeItem, Rel, Seg, Token,
    COINDEX, NULL,
};
use crate::transduce::{head_daughter, tag_anchor, HeadRules};

/// XPath of the sentence text used for character spans by default.
pub const DEFAULT_SPAN_PATH: &str = "/p/s[1]/text()";

/// Raw sentence text; when given, leaves are anchored by character spans
/// into it instead of by token ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceText<'a> {
    pub text: &'a str,
    pub path: String,
}

impl<'a> SentenceText<'a> {
    pub fn new(text: &'a str) -> Self {
        SentenceText {
            text,
            path: DEFAULT_SPAN_PATH.to_string(),
        }
    }

    pub fn with_path(mut self, path: impl Into<String>) -> Self {
        self.path = path.into();
        self
    }
}

/// What happens to punctuation leaves such as `,` and `.`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PunctuationPolicy {
    /// Not tokenized and not anchored.
    #[default]
    Drop,
    /// Tokenized and anchored by a seg in the parent, without a category.
    Anchor,
}

/// Choices the bracketed notation leaves open when building a pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingStyle {
    /// Mark untagged objects after verbal heads (the head rules'
    /// implicit-object entry).
    pub implicit_object: bool,
    /// Give trace nodes the category of their own bracket.
    pub cat_on_ref: bool,
    pub punctuation: PunctuationPolicy,
}

impl Default for EncodingStyle {
    fn default() -> Self {
        EncodingStyle {
            implicit_object: true,
            cat_on_ref: true,
            punctuation: PunctuationPolicy::Drop,
        }
    }
}

impl EncodingStyle {
    /// Only what the brackets say: no inferred objects, bare trace nodes.
    pub fn explicit_only() -> Self {
        EncodingStyle {
            implicit_object: false,
            cat_on_ref: false,
            punctuation: PunctuationPolicy::Drop,
        }
    }

    pub fn with_punctuation(mut self, punctuation: PunctuationPolicy) -> Self {
        self.punctuation = punctuation;
        self
    }
}

#[derive(Clone, Copy)]
enum LeafRole {
    Token(usize),
    Dropped,
    Null,
}

struct Builder<'a> {
    style: EncodingStyle,
    span_path: Option<&'a str>,
    roles: Vec<LeafRole>,
    cursor: usize,
    tokens: Vec<Token>,
    next_id: usize,
    coindex: HashMap<u32, String>,
    traces: Vec<(String, u32)>,
    tags: Vec<(String, Vec<String>)>,
    parent: HashMap<String, String>,
}

/// Converts a bracketed tree to a pivot. Nodes are numbered `s0, s1, ...` in
/// preorder and tokens `w1, w2, ...`; function tags become rels on their
/// constituent headed by the lowest head-path node of the parent; a
/// bracket whose only child is an indexed trace becomes a `ref` node.
pub fn ptb_to_pivot(
    tree: &PtbTree,
    rules: &HeadRules,
    sentence: Option<&SentenceText<'_>>,
    style: EncodingStyle,
) -> Result<AnnotationDoc, PtbError> {
    let leaves = tree.leaves();
    let mut roles = Vec::with_capacity(leaves.len());
    let mut words = Vec::new();
    for leaf in &leaves {
        let role = if null_element(leaf).is_some() {
            LeafRole::Null
        } else if style.punctuation == PunctuationPolicy::Drop && is_punctuation(leaf) {
            LeafRole::Dropped
        } else {
            words.push(*leaf);
            LeafRole::Token(words.len() - 1)
        };
        roles.push(role);
    }
    let tokens = match sentence {
        None => tokens_from_words(&words),
        Some(s) => locate(&leaves, &roles, s.text)?,
    };

    let mut b = Builder {
        style,
        span_path: sentence.map(|s| s.path.as_str()),
        roles,
        cursor: 0,
        tokens,
        next_id: 0,
        coindex: HashMap::new(),
        traces: Vec::new(),
        tags: Vec::new(),
        parent: HashMap::new(),
    };
    let mut root = match tree {
        PtbTree::Internal { .. } => b.internal(tree, None)?,
        PtbTree::Leaf(_) => return Err(PtbError::NotConstituency("leaf at top level".into())),
    };

    // Traces and co-indices.
    let mut refs = HashMap::new();
    for (id, n) in &b.traces {
        let target = b.coindex.get(n).ok_or(PtbError::UnresolvedCoindex(*n))?;
        refs.insert(id.clone(), target.clone());
    }
    let referenced: HashSet<&String> = refs.values().collect();
    let unreferenced: HashMap<String, u32> = b
        .coindex
        .iter()
        .filter(|(_, id)| !referenced.contains(id))
        .map(|(n, id)| (id.clone(), *n))
        .collect();
    walk_mut(&mut root, &mut |node| {
        let Some(id) = node.id.clone() else { return };
        if let Some(t) = refs.get(&id) {
            node.reference = Some(t.clone());
        }
        if let Some(n) = unreferenced.get(&id) {
            let at = leading_feats(node);
            node.content.insert(
                at,
                NodeItem::Feat(Feat {
                    key: COINDEX.into(),
                    value: FeatValue::Inline(n.to_string()),
                }),
            );
        }
    });

    let mut doc = AnnotationDoc::new("", b.tokens, root);

    // Function tags and implicit objects become rels.
    let mut rels: HashMap<String, Vec<Rel>> = HashMap::new();
    {
        let index = doc.index();
        for (id, tags) in &b.tags {
            let head = match b.parent.get(id).and_then(|p| index.node(p)) {
                Some(parent) => tag_anchor(&index, parent, rules).id_str().to_string(),
                None => id.clone(),
            };
            rels.entry(id.clone())
                .or_default()
                .extend(tags.iter().map(|t| Rel::new(t.clone(), head.clone())));
        }
        if style.implicit_object {
            let tagged: HashSet<&str> = b.tags.iter().map(|(id, _)| id.as_str()).collect();
            let label = rules.implicit_object().map(|io| io.label.clone());
            for (node, head) in implicit_objects(&index, rules, |n| tagged.contains(n.id_str())) {
                if let (Some(id), Some(label)) = (node.id.clone(), label.clone()) {
                    rels.entry(id).or_default().push(Rel::new(label, head));
                }
            }
        }
    }
    walk_mut(&mut doc.root, &mut |node| {
        if let Some(list) = node.id.as_ref().and_then(|id| rels.remove(id)) {
            let at = leading_feats(node);
            node.content.splice(at..at, list.into_iter().map(NodeItem::Rel));
        }
    });
    Ok(doc)
}

impl Builder<'_> {
    fn fresh_id(&mut self) -> String {
        let id = format!("s{}", self.next_id);
        self.next_id += 1;
        id
    }

    fn take_leaf(&mut self) -> LeafRole {
        let role = self.roles[self.cursor];
        self.cursor += 1;
        role
    }

    fn internal(&mut self, tree: &PtbTree, parent: Option<&str>) -> Result<Node, PtbError> {
        let PtbTree::Internal { label, children } = tree else {
            unreachable!("called on internal nodes only")
        };
        let id = self.fresh_id();
        let l = split_label(label);
        if let Some(n) = l.coindex {
            if self.coindex.insert(n, id.clone()).is_some() {
                return Err(PtbError::DuplicateCoindex(n));
            }
        }
        if !l.function_tags.is_empty() {
            self.tags.push((id.clone(), l.function_tags.clone()));
        }
        if let Some(p) = parent {
            self.parent.insert(id.clone(), p.to_string());
        }
        let mut node = Node::new(id.clone());

        if let [PtbTree::Leaf(text)] = children.as_slice() {
            if let Some((base, index)) = null_element(text) {
                self.take_leaf();
                if let Some(n) = index {
                    self.traces.push((id, n));
                    if self.style.cat_on_ref {
                        node = node.with_cat(&l.category);
                    }
                    if base != "*" {
                        node = node.with(null_feat(base));
                    }
                } else {
                    node = node.with_cat(&l.category).with(null_feat(base));
                }
                return Ok(node);
            }
        }

        node = node.with_cat(&l.category);
        let mut run: Vec<usize> = Vec::new();
        for child in children {
            match child {
                PtbTree::Leaf(text) => match self.take_leaf() {
                    LeafRole::Token(p) => run.push(p),
                    LeafRole::Dropped => self.flush(&mut node, &mut run),
                    LeafRole::Null => {
                        self.flush(&mut node, &mut run);
                        let (base, index) = null_element(text).expect("classified as null");
                        let child_id = self.fresh_id();
                        self.parent.insert(child_id.clone(), id.clone());
                        let mut n = Node::new(child_id.clone()).with(null_feat(base));
                        if let Some(ix) = index {
                            self.traces.push((child_id, ix));
                            n.reference = Some(String::new());
                        }
                        node = node.with_child(n);
                    }
                },
                PtbTree::Internal { .. } => {
                    self.flush(&mut node, &mut run);
                    let c = self.internal(child, Some(&id))?;
                    node = node.with_child(c);
                }
            }
        }
        self.flush(&mut node, &mut run);
        Ok(node)
    }

    /// Emits the pending run of word tokens: one merged character span, or
    /// one token seg per word.
    fn flush(&self, node: &mut Node, run: &mut Vec<usize>) {
        if run.is_empty() {
            return;
        }
        match self.span_path {
            Some(path) => {
                let first = &self.tokens[run[0]];
                let last = &self.tokens[*run.last().expect("non-empty")];
                node.content.push(NodeItem::Seg(Seg::Span(CharSpan {
                    path: path.to_string(),
                    start: first.char_start,
                    len: last.char_end() - first.char_start,
                })));
            }
            None => {
                for &p in run.iter() {
                    node.content.push(NodeItem::Seg(Seg::Token(self.tokens[p].id.clone())));
                }
            }
        }
        run.clear();
    }
}

fn null_feat(base: &str) -> NodeItem {
    NodeItem::Feat(Feat {
        key: NULL.into(),
        value: FeatValue::Inline(base.to_string()),
    })
}

fn leading_feats(node: &Node) -> usize {
    node.content
        .iter()
        .take_while(|i| matches!(i, NodeItem::Feat(_)))
        .count()
}

fn walk_mut(node: &mut Node, f: &mut impl FnMut(&mut Node)) {
    f(node);
    fn items(list: &mut [NodeItem], f: &mut impl FnMut(&mut Node)) {
        for item in list {
            match item {
                NodeItem::Node(n) => walk_mut(n, f),
                NodeItem::Brack(b) => items(&mut b.items, f),
                NodeItem::Alt(a) => a.alternatives.iter_mut().for_each(|alt| items(alt, f)),
                _ => {}
            }
        }
    }
    items(&mut node.content, f);
}

/// Character offsets of the token leaves, found by left-to-right search.
fn locate(leaves: &[&str], roles: &[LeafRole], text: &str) -> Result<Vec<Token>, PtbError> {
    let chars: Vec<char> = text.chars().collect();
    let mut cursor = 0;
    let mut tokens = Vec::new();
    for (leaf, role) in leaves.iter().zip(roles) {
        if matches!(role, LeafRole::Null) {
            continue;
        }
        let needle: Vec<char> = leaf.chars().collect();
        let found = (cursor..=chars.len().saturating_sub(needle.len()))
            .find(|&i| chars[i..].starts_with(&needle));
        match (found, role) {
            (Some(i), LeafRole::Token(_)) => {
                tokens.push(Token::new(format!("w{}", tokens.len() + 1), *leaf, i + 1));
                cursor = i + needle.len();
            }
            (Some(i), _) => cursor = i + needle.len(),
            (None, LeafRole::Token(_)) => return Err(PtbError::LeafNotFound(leaf.to_string())),
            (None, _) => {}
        }
    }
    Ok(tokens)
}

/// Untagged nominal constituents directly after verbal head material, paired
/// with the id of the verbal node they attach to.
pub(crate) fn implicit_objects<'a>(
    index: &DocIndex<'a>,
    rules: &HeadRules,
    is_tagged: impl Fn(&Node) -> bool,
) -> Vec<(&'a Node, String)> {
    let Some(io) = rules.implicit_object() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for node in index.doc().root.preorder() {
        if node.reference.is_some() {
            continue;
        }
        let Some((h, hd, ds)) = head_daughter(index, node, rules) else {
            continue;
        };
        let Some(Daughter::Node(next)) = ds.get(h + 1) else {
            continue;
        };
        if next.reference.is_some() || next.category() != Some(io.nominal.as_str()) || is_tagged(next) {
            continue;
        }
        let head = match hd {
            Daughter::Node(v) if v.reference.is_none() && v.category() == Some(io.verbal.as_str()) => v.id.clone(),
            Daughter::Token(_) if node.category() == Some(io.verbal.as_str()) => node.id.clone(),
            _ => None,
        };
        if let Some(head) = head {
            out.push((*next, head));
        }
    }
    out
}

/// Inverse of [`ptb_to_pivot`] for the same rules and style. Co-indices are
/// numbered 1, 2, ... in preorder.
pub fn pivot_to_ptb(doc: &AnnotationDoc, rules: &HeadRules, style: EncodingStyle) -> Result<PtbTree, PtbError> {
    let index = doc.index();
    let nodes = doc.root.preorder();

    let targets: HashSet<&str> = nodes.iter().filter_map(|n| n.reference.as_deref()).collect();
    let mut coindex: HashMap<&str, u32> = HashMap::new();
    for n in &nodes {
        if let Some(id) = n.id.as_deref() {
            if targets.contains(id) || n.feat(COINDEX).is_some() {
                let next = coindex.len() as u32 + 1;
                coindex.entry(id).or_insert(next);
            }
        }
    }

    let mut implicit: HashMap<*const Node, String> = HashMap::new();
    if let (true, Some(io)) = (style.implicit_object, rules.implicit_object()) {
        let tagged = |n: &Node| n.rels().iter().any(|r| r.dependent.is_none() && r.label != io.label);
        for (node, head) in implicit_objects(&index, rules, tagged) {
            implicit.insert(node as *const Node, head);
        }
    }

    let w = Writer {
        doc,
        index: &index,
        coindex: &coindex,
        implicit: &implicit,
        implicit_label: rules.implicit_object().map(|io| io.label.as_str()),
    };
    let mut out = w.node(&doc.root)?;
    match out.len() {
        1 => Ok(out.remove(0)),
        _ => Err(PtbError::NotConstituency(doc.root.id_str().to_string())),
    }
}

struct Writer<'a> {
    doc: &'a AnnotationDoc,
    index: &'a DocIndex<'a>,
    coindex: &'a HashMap<&'a str, u32>,
    implicit: &'a HashMap<*const Node, String>,
    implicit_label: Option<&'a str>,
}

impl Writer<'_> {
    fn label(&self, node: &Node, category: &str) -> String {
        let mut skip = self.implicit.get(&(node as *const Node));
        let mut tags = Vec::new();
        for r in node.rels() {
            if r.dependent.is_some() {
                continue;
            }
            if let Some(head) = skip {
                if Some(r.label.as_str()) == self.implicit_label && &r.head == head {
                    skip = None;
                    continue;
                }
            }
            tags.push(r.label.clone());
        }
        PtbLabel {
            category: category.to_string(),
            function_tags: tags,
            coindex: node.id.as_deref().and_then(|id| self.coindex.get(id).copied()),
        }
        .render()
    }

    fn node(&self, node: &Node) -> Result<Vec<PtbTree>, PtbError> {
        let null = node.feat(NULL);
        if let Some(target) = node.reference.as_deref() {
            let n = self
                .coindex
                .get(target)
                .ok_or_else(|| PtbError::NotConstituency(node.id_str().to_string()))?;
            let leaf = PtbTree::Leaf(format!("{}-{n}", null.unwrap_or("*")));
            let has_tags = node.rels().iter().any(|r| r.dependent.is_none());
            let category = match node.category() {
                Some(c) => Some(c),
                None if has_tags || null.is_none() => self.index.category(node),
                None => None,
            };
            return Ok(match category {
                Some(c) => vec![PtbTree::node(self.label(node, c), vec![leaf])],
                None => vec![leaf],
            });
        }
        let Some(category) = node.category() else {
            return match null {
                Some(text) => Ok(vec![PtbTree::leaf(text)]),
                None => Err(PtbError::NotConstituency(node.id_str().to_string())),
            };
        };
        let mut children = Vec::new();
        for item in node.items() {
            match item {
                NodeItem::Seg(seg) => {
                    for p in self.index.seg_tokens(seg).unwrap_or_default() {
                        children.push(PtbTree::leaf(self.doc.tokens[p].text.clone()));
                    }
                }
                NodeItem::Node(n) => children.extend(self.node(n)?),
                _ => {}
            }
        }
        if children.is_empty() {
            match null {
                Some(text) => children.push(PtbTree::leaf(text)),
                None => return Err(PtbError::NotConstituency(node.id_str().to_string())),
            }
        }
        Ok(vec![PtbTree::node(self.label(node, category), children)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pivot::{covered_text, validate_doc};
    use crate::ptb::parse_ptb;

    const PAUL_TREE: &str = "((S (NP-SBJ-1 Paul) (VP intends) (S (NP-SBJ *-1) (VP to (VP leave (NP IBM)))) .))";

    #[test]
    fn paul_ids_and_rels() {
        let rules = HeadRules::shipped();
        let doc = ptb_to_pivot(&parse_ptb(PAUL_TREE).unwrap(), &rules, None, EncodingStyle::explicit_only()).unwrap();
        assert!(validate_doc(&doc).is_empty());
        assert_eq!(doc.tokens.len(), 5);
        let ids: Vec<_> = doc.root.preorder().iter().map(|n| n.id_str().to_string()).collect();
        assert_eq!(ids, ["s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7"]);
        let index = doc.index();
        let s1 = index.node("s1").unwrap();
        assert_eq!(s1.rels()[0], &Rel::new("SBJ", "s2"));
        let s4 = index.node("s4").unwrap();
        assert_eq!(s4.reference.as_deref(), Some("s1"));
        assert_eq!(s4.rels()[0], &Rel::new("SBJ", "s6"));
        assert!(s4.category().is_none());
        assert_eq!(covered_text(&doc, s4).unwrap(), "Paul");
        assert!(index.node("s7").unwrap().rels().is_empty());
    }

    #[test]
    fn default_style_marks_objects() {
        let rules = HeadRules::shipped();
        let doc = ptb_to_pivot(&parse_ptb(PAUL_TREE).unwrap(), &rules, None, EncodingStyle::default()).unwrap();
        let index = doc.index();
        assert_eq!(index.node("s7").unwrap().rels()[0], &Rel::new("OBJ", "s6"));
        assert_eq!(index.node("s4").unwrap().category(), Some("NP"));
    }

    #[test]
    fn dangling_trace_is_an_error() {
        let rules = HeadRules::shipped();
        let t = parse_ptb("((S (NP-SBJ *-9) (VP left)))").unwrap();
        assert_eq!(
            ptb_to_pivot(&t, &rules, None, EncodingStyle::default()),
            Err(PtbError::UnresolvedCoindex(9))
        );
    }

    #[test]
    fn reverse_conversion() {
        let rules = HeadRules::shipped();
        for style in [EncodingStyle::default(), EncodingStyle::explicit_only()] {
            let t = parse_ptb("((S (NP-SBJ-1 Paul) (VP intends) (S (NP-SBJ *-1) (VP to (VP leave (NP IBM))))))").unwrap();
            let doc = ptb_to_pivot(&t, &rules, None, style).unwrap();
            assert_eq!(pivot_to_ptb(&doc, &rules, style).unwrap(), t);
        }
        let t = parse_ptb(
            "((S (NP-SBJ-2 x) (VP said (SBAR 0 (S (NP-SBJ *T*-2) (VP y)))) (NP-TMP-3 z) (ADVP *U*) (NP *-2)))",
        )
        .unwrap();
        let style = EncodingStyle::default();
        let doc = ptb_to_pivot(&t, &rules, None, style).unwrap();
        assert!(validate_doc(&doc).is_empty(), "{:?}", validate_doc(&doc));
        assert_eq!(pivot_to_ptb(&doc, &rules, style).unwrap(), t.renumber_coindices());
    }

    #[test]
    fn spans_over_sentence_text() {
        let rules = HeadRules::shipped();
        let t = parse_ptb("((S (NP a b) (VP c) , (NP d)))").unwrap();
        let text = "a b c, d";
        let doc = ptb_to_pivot(&t, &rules, Some(&SentenceText::new(text)), EncodingStyle::default()).unwrap();
        let spans: Vec<_> = doc
            .root
            .preorder()
            .iter()
            .flat_map(|n| n.items())
            .filter_map(|i| match i {
                NodeItem::Seg(Seg::Span(s)) => Some((s.start, s.len)),
                _ => None,
            })
            .collect();
        assert_eq!(spans, [(1, 3), (5, 1), (8, 1)]);
        assert_eq!(doc.tokens.len(), 4);

        let kept = ptb_to_pivot(&t, &rules, None, EncodingStyle::default().with_punctuation(PunctuationPolicy::Anchor)).unwrap();
        assert_eq!(kept.tokens.len(), 5);
        assert_eq!(kept.root.items().iter().filter(|i| matches!(i, NodeItem::Seg(_))).count(), 1);

        assert!(matches!(
            ptb_to_pivot(&t, &rules, Some(&SentenceText::new("a b")), EncodingStyle::default()),
            Err(PtbError::LeafNotFound(_))
        ));
    }
}
