use std::collections::BTreeMap;

use super::{AnnotationDoc, CharSpan, DocIndex, Node, NodeItem, PivotError, Seg, Token};

/// Sentence text rebuilt from token offsets; gaps between tokens are spaces.
pub fn primary_text(doc: &AnnotationDoc) -> Vec<char> {
    let len = doc
        .tokens
        .iter()
        .map(|t| t.char_end().saturating_sub(1))
        .max()
        .unwrap_or(0);
    let mut chars = vec![' '; len];
    for tok in &doc.tokens {
        for (i, ch) in tok.text.chars().enumerate().take(tok.char_len) {
            if let Some(slot) = chars.get_mut(tok.char_start - 1 + i) {
                *slot = ch;
            }
        }
    }
    chars
}

/// Text reached through the node's anchors, space-joined in document order.
/// A `ref` node yields its referent's text; `ref` descendants are skipped
/// because they denote material anchored elsewhere.
pub fn covered_text(doc: &AnnotationDoc, node: &Node) -> Result<String, PivotError> {
    let index = doc.index();
    let text = primary_text(doc);
    let node = index.referent(node)?;
    let mut pieces = Vec::new();
    collect(&index, &text, node, &mut pieces)?;
    Ok(pieces.join(" "))
}

fn collect(
    index: &DocIndex<'_>,
    text: &[char],
    node: &Node,
    pieces: &mut Vec<String>,
) -> Result<(), PivotError> {
    for item in node.items() {
        match item {
            NodeItem::Seg(seg) => {
                let piece = seg_text(index, text, seg).ok_or_else(|| PivotError::DanglingAnchor {
                    node: node.id_str().to_string(),
                    anchor: describe(seg),
                })?;
                if !piece.is_empty() {
                    pieces.push(piece);
                }
            }
            NodeItem::Node(child) if child.reference.is_none() => collect(index, text, child, pieces)?,
            _ => {}
        }
    }
    Ok(())
}

fn seg_text(index: &DocIndex<'_>, text: &[char], seg: &Seg) -> Option<String> {
    match seg {
        Seg::Token(id) => index
            .token_position(id)
            .map(|p| index.doc().tokens[p].text.clone()),
        Seg::Span(span) => {
            if span.start == 0 || span.start - 1 + span.len > text.len() {
                return None;
            }
            Some(text[span.start - 1..span.start - 1 + span.len].iter().collect())
        }
    }
}

fn describe(seg: &Seg) -> String {
    match seg {
        Seg::Token(id) => id.clone(),
        Seg::Span(s) => format!("{}[{},{}]", s.path, s.start, s.len),
    }
}

/// Tokens for a stand-off layer anchored by character spans: the
/// whitespace-separated words inside each span of `text`, numbered
/// `w1, w2, ...` by offset. Words reached by several spans count once.
pub fn tokens_from_spans(root: &Node, text: &str) -> Vec<Token> {
    fn spans<'a>(items: &'a [NodeItem], out: &mut Vec<&'a CharSpan>) {
        for item in items {
            match item {
                NodeItem::Seg(Seg::Span(s)) => out.push(s),
                NodeItem::Node(n) => spans(&n.content, out),
                NodeItem::Brack(b) => spans(&b.items, out),
                NodeItem::Alt(a) => a.alternatives.iter().for_each(|alt| spans(alt, out)),
                _ => {}
            }
        }
    }
    let mut found = Vec::new();
    spans(&root.content, &mut found);
    let chars: Vec<char> = text.chars().collect();
    let mut words = BTreeMap::new();
    for s in found {
        if s.start == 0 {
            continue;
        }
        let end = (s.start - 1 + s.len).min(chars.len());
        let mut i = s.start - 1;
        while i < end {
            if chars[i].is_whitespace() {
                i += 1;
                continue;
            }
            let from = i;
            while i < end && !chars[i].is_whitespace() {
                i += 1;
            }
            words.entry(from + 1).or_insert_with(|| chars[from..i].iter().collect::<String>());
        }
    }
    words
        .into_iter()
        .enumerate()
        .map(|(k, (start, word))| Token::new(format!("w{}", k + 1), word, start))
        .collect()
}
