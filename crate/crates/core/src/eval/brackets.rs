use std::collections::{BTreeMap, HashMap};

use super::{EvalError, EvalReport, LabelCounts, Readings};
use crate::pivot::{AnnotationDoc, Node, NodeItem};
use crate::registry::Dialect;

/// A labeled span over 1-based token positions, both ends inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bracket {
    pub start: usize,
    pub end: usize,
    /// Registry id of the node's category; empty for uncategorised nodes.
    pub label: String,
    /// Id of the node the bracket came from, when it has one.
    pub node: Option<String>,
}

impl Bracket {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        Bracket {
            start,
            end,
            label: label.into(),
            node: None,
        }
    }

    /// Overlap without nesting.
    pub fn crosses(&self, other: &Bracket) -> bool {
        (self.start < other.start && other.start <= self.end && self.end < other.end)
            || (other.start < self.start && self.start <= other.end && other.end < self.end)
    }

    fn describe(&self) -> String {
        match &self.node {
            Some(id) => id.clone(),
            None => format!("({},{},{})", self.start, self.end, self.label),
        }
    }
}

/// Brackets of one sentence, sorted, plus the sentence length.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BracketSet {
    pub len: usize,
    pub brackets: Vec<Bracket>,
}

impl BracketSet {
    pub fn new(len: usize, mut brackets: Vec<Bracket>) -> Self {
        brackets.sort();
        BracketSet { len, brackets }
    }

    /// (start, end, label) triples, ignoring node ids.
    pub fn spans(&self) -> Vec<(usize, usize, &str)> {
        self.brackets.iter().map(|b| (b.start, b.end, b.label.as_str())).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BracketOptions {
    pub include_root: bool,
    pub include_single_token: bool,
}

impl Default for BracketOptions {
    fn default() -> Self {
        BracketOptions {
            include_root: true,
            include_single_token: true,
        }
    }
}

/// One bracket per node dominating at least one token, labeled with its
/// category normalized through `dialect`. Ref nodes are skipped.
pub fn brackets_of(doc: &AnnotationDoc, dialect: &Dialect) -> Result<BracketSet, EvalError> {
    brackets_of_with(doc, dialect, BracketOptions::default())
}

pub fn brackets_of_with(doc: &AnnotationDoc, dialect: &Dialect, options: BracketOptions) -> Result<BracketSet, EvalError> {
    let index = doc.index();
    let mut out = Vec::new();
    for node in doc.root.preorder() {
        check_anchors(doc, node)?;
        if node.reference.is_some() {
            continue;
        }
        if !options.include_root && std::ptr::eq(node, &doc.root) {
            continue;
        }
        let tokens = index.dominated_tokens(node);
        let (Some(&first), Some(&last)) = (tokens.first(), tokens.last()) else { continue };
        if !options.include_single_token && first == last {
            continue;
        }
        let label = match node.category() {
            Some(cat) => dialect.normalize(cat)?.to_string(),
            None => String::new(),
        };
        out.push(Bracket {
            start: first + 1,
            end: last + 1,
            label,
            node: node.id.clone(),
        });
    }
    Ok(BracketSet::new(doc.tokens.len(), out))
}

fn check_anchors(doc: &AnnotationDoc, node: &Node) -> Result<(), EvalError> {
    let index = doc.index();
    for item in node.items() {
        if let NodeItem::Seg(seg) = item {
            if index.seg_tokens(seg).is_none_or(|t| t.is_empty()) {
                return Err(EvalError::NoTokenAnchor(node.id_str().to_string()));
            }
        }
    }
    Ok(())
}

/// Multiset matching: each gold bracket is consumed at most once.
pub fn parseval(gold: &BracketSet, test: &BracketSet, labeled: bool) -> Result<EvalReport, EvalError> {
    if gold.len != test.len {
        return Err(EvalError::LengthMismatch {
            gold: gold.len,
            test: test.len,
        });
    }
    let key = |b: &Bracket| (b.start, b.end, if labeled { b.label.clone() } else { String::new() });

    let mut available: HashMap<_, usize> = HashMap::new();
    for b in &gold.brackets {
        *available.entry(key(b)).or_default() += 1;
    }
    let mut report = EvalReport {
        gold: gold.brackets.len(),
        test: test.brackets.len(),
        sentences: 1,
        ..EvalReport::default()
    };
    for b in &test.brackets {
        match available.get_mut(&key(b)) {
            Some(n) if *n > 0 => {
                *n -= 1;
                report.matched += 1;
            }
            _ => report.unmatched_test.push(b.describe()),
        }
    }
    let mut wanted: HashMap<_, usize> = HashMap::new();
    for b in &test.brackets {
        *wanted.entry(key(b)).or_default() += 1;
    }
    for b in &gold.brackets {
        match wanted.get_mut(&key(b)) {
            Some(n) if *n > 0 => *n -= 1,
            _ => report.unmatched_gold.push(b.describe()),
        }
    }
    report.crossing = test
        .brackets
        .iter()
        .filter(|t| gold.brackets.iter().any(|g| t.crosses(g)))
        .count();
    if report.matched == report.gold && report.matched == report.test {
        report.exact = 1;
    }
    report.per_label = per_label(gold, test);
    Ok(report)
}

/// Labeled counts per label, independent of the labeled flag.
fn per_label(gold: &BracketSet, test: &BracketSet) -> BTreeMap<String, LabelCounts> {
    let mut spans: HashMap<(usize, usize, &str), (usize, usize)> = HashMap::new();
    for b in &gold.brackets {
        spans.entry((b.start, b.end, &b.label)).or_default().0 += 1;
    }
    for b in &test.brackets {
        spans.entry((b.start, b.end, &b.label)).or_default().1 += 1;
    }
    let mut out: BTreeMap<String, LabelCounts> = BTreeMap::new();
    for ((_, _, label), (g, t)) in spans {
        let c = out.entry(label.to_string()).or_default();
        c.gold += g;
        c.test += t;
        c.matched += g.min(t);
    }
    out
}

/// PARSEVAL of each test reading against the gold default reading.
pub fn parseval_readings(
    gold: &AnnotationDoc,
    test: &AnnotationDoc,
    gold_dialect: &Dialect,
    test_dialect: &Dialect,
    labeled: bool,
    options: BracketOptions,
) -> Result<Readings<EvalReport>, EvalError> {
    let g = brackets_of_with(&gold.reading(0), gold_dialect, options)?;
    let scores = (0..test.reading_count())
        .map(|k| parseval(&g, &brackets_of_with(&test.reading(k), test_dialect, options)?, labeled))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Readings::pick(scores, EvalReport::f1))
}
