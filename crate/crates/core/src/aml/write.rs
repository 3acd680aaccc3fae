use std::collections::HashSet;

use super::{span_href, AmlError, Concrete, SerializationProfile};
use crate::pivot::{AnnotationDoc, Feat, FeatValue, Node, NodeItem, Rel, Seg};
use crate::registry::InstantiationStyle;

/// Pretty-printer: one element per line, text-only elements kept inline.
struct Out {
    buf: String,
    indent: usize,
}

enum Body {
    Empty,
    Text(String),
    Children,
}

impl Out {
    fn pad(&mut self, depth: usize) {
        for _ in 0..depth * self.indent {
            self.buf.push(' ');
        }
    }

    fn open(&mut self, depth: usize, name: &str, attrs: &[(String, String)], body: Body) {
        self.pad(depth);
        self.buf.push('<');
        self.buf.push_str(name);
        for (k, v) in attrs {
            self.buf.push(' ');
            self.buf.push_str(k);
            self.buf.push_str("=\"");
            escape_attr(v, &mut self.buf);
            self.buf.push('"');
        }
        match body {
            Body::Empty => self.buf.push_str("/>\n"),
            Body::Text(t) => {
                self.buf.push('>');
                escape_text(&t, &mut self.buf);
                self.buf.push_str("</");
                self.buf.push_str(name);
                self.buf.push_str(">\n");
            }
            Body::Children => self.buf.push_str(">\n"),
        }
    }

    fn close(&mut self, depth: usize, name: &str) {
        self.pad(depth);
        self.buf.push_str("</");
        self.buf.push_str(name);
        self.buf.push_str(">\n");
    }
}

fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

fn attr(k: &str, v: &str) -> (String, String) {
    (k.to_string(), v.to_string())
}

struct Writer<'p> {
    out: Out,
    concrete: Option<&'p Concrete>,
}

impl Writer<'_> {
    /// Key and value as they appear in the markup.
    fn feat_names(&self, f: &Feat) -> Result<(String, FeatValue), AmlError> {
        let Some(c) = self.concrete else {
            return Ok((f.key.clone(), f.value.clone()));
        };
        let key = c.out_label(&f.key)?;
        let value = match &f.value {
            FeatValue::Inline(v) if c.renames_values(&f.key) => FeatValue::Inline(c.out_label(v)?),
            other => other.clone(),
        };
        Ok((key, value))
    }

    fn style(&self, local_key: &str) -> Option<InstantiationStyle> {
        self.concrete.and_then(|c| c.target.style(local_key))
    }

    fn feat(&mut self, depth: usize, f: &Feat) -> Result<(), AmlError> {
        let (key, value) = self.feat_names(f)?;
        let v = match value {
            FeatValue::Target(t) => {
                self.out.open(depth, "feat", &[attr("type", &key), attr("target", &t)], Body::Empty);
                return Ok(());
            }
            FeatValue::Inline(v) => v,
        };
        match self.style(&key) {
            Some(InstantiationStyle::Element) => self.out.open(depth, &key, &[], text_body(v)),
            Some(InstantiationStyle::ValuedElement) => {
                self.out.open(depth, &key, &[attr("value", &v)], Body::Empty)
            }
            Some(InstantiationStyle::TypedElement) => {
                let name = self.concrete.expect("styles imply concrete").target.expansions().typed_element.clone();
                self.out.open(depth, &name, &[attr("type", &key)], text_body(v))
            }
            // attribute style falls back to a feat element when not in the leading run
            Some(InstantiationStyle::Attribute) | None => {
                self.out.open(depth, "feat", &[attr("type", &key)], text_body(v))
            }
        }
        Ok(())
    }

    fn rel(&mut self, depth: usize, r: &Rel) -> Result<(), AmlError> {
        let label = match self.concrete {
            Some(c) => c.out_label(&r.label)?,
            None => r.label.clone(),
        };
        let mut attrs = vec![attr("type", &label), attr("head", &r.head)];
        for (k, v) in [("dependent", &r.dependent), ("introducer", &r.introducer), ("initial", &r.initial)] {
            if let Some(v) = v {
                attrs.push(attr(k, v));
            }
        }
        self.out.open(depth, "rel", &attrs, Body::Empty);
        Ok(())
    }

    fn item(&mut self, depth: usize, item: &NodeItem) -> Result<(), AmlError> {
        match item {
            NodeItem::Feat(f) => self.feat(depth, f)?,
            NodeItem::Rel(r) => self.rel(depth, r)?,
            NodeItem::Seg(Seg::Token(t)) => self.out.open(depth, "seg", &[attr("target", t)], Body::Empty),
            NodeItem::Seg(Seg::Span(s)) => {
                self.out.open(depth, "seg", &[attr("xlink:href", &span_href(s))], Body::Empty)
            }
            NodeItem::Node(n) => self.node(depth, n, None)?,
            NodeItem::Brack(b) => self.container(depth, "brack", &[], &b.items)?,
            NodeItem::Alt(a) => {
                if a.alternatives.is_empty() {
                    self.out.open(depth, "alt", &[], Body::Empty);
                } else {
                    self.out.open(depth, "alt", &[], Body::Children);
                    for alt in &a.alternatives {
                        match alt.as_slice() {
                            [single] if !matches!(single, NodeItem::Brack(_)) => self.item(depth + 1, single)?,
                            items => self.container(depth + 1, "brack", &[], items)?,
                        }
                    }
                    self.out.close(depth, "alt");
                }
            }
        }
        Ok(())
    }

    fn container(&mut self, depth: usize, name: &str, attrs: &[(String, String)], items: &[NodeItem]) -> Result<(), AmlError> {
        if items.is_empty() {
            self.out.open(depth, name, attrs, Body::Empty);
            return Ok(());
        }
        self.out.open(depth, name, attrs, Body::Children);
        self.items(depth + 1, items)?;
        self.out.close(depth, name);
        Ok(())
    }

    /// Items in order; with grouping on, each run of features and each run
    /// of relations goes inside its group element.
    fn items(&mut self, depth: usize, items: &[NodeItem]) -> Result<(), AmlError> {
        let groups = self
            .concrete
            .map(|c| c.target.expansions())
            .filter(|e| e.group_features_and_relations)
            .map(|e| (e.feature_group.clone(), e.relation_group.clone()));
        let Some((fg, rg)) = groups else {
            for it in items {
                self.item(depth, it)?;
            }
            return Ok(());
        };
        let mut i = 0;
        while i < items.len() {
            let run_of = |pred: fn(&NodeItem) -> bool| items[i..].iter().take_while(|x| pred(x)).count();
            let feats = run_of(|x| matches!(x, NodeItem::Feat(_)));
            let rels = run_of(|x| matches!(x, NodeItem::Rel(_)));
            let (name, n) = match (feats, rels) {
                (0, 0) => {
                    self.item(depth, &items[i])?;
                    i += 1;
                    continue;
                }
                (n, 0) => (&fg, n),
                (_, n) => (&rg, n),
            };
            self.out.open(depth, name, &[], Body::Children);
            for it in &items[i..i + n] {
                self.item(depth + 1, it)?;
            }
            self.out.close(depth, name);
            i += n;
        }
        Ok(())
    }

    fn node(&mut self, depth: usize, n: &Node, base: Option<&str>) -> Result<(), AmlError> {
        let mut attrs = Vec::new();
        if let Some(b) = base {
            attrs.push(attr("xml:base", b));
        }
        if let Some(id) = &n.id {
            attrs.push(attr("id", id));
        }
        if let Some(r) = &n.reference {
            attrs.push(attr("ref", r));
        }
        // leading features in attribute style become attributes of the struct
        let mut used = HashSet::new();
        let mut lead = 0;
        for item in &n.content {
            let NodeItem::Feat(f @ Feat { value: FeatValue::Inline(_), .. }) = item else { break };
            if self.concrete.is_none() {
                break;
            }
            let (key, value) = self.feat_names(f)?;
            if self.style(&key) != Some(InstantiationStyle::Attribute) || !used.insert(key.clone()) {
                break;
            }
            let FeatValue::Inline(v) = value else { unreachable!() };
            attrs.push((key, v));
            lead += 1;
        }
        self.container(depth, "struct", &attrs, &n.content[lead..])
    }
}

fn text_body(v: String) -> Body {
    if v.is_empty() {
        Body::Empty
    } else {
        Body::Text(v)
    }
}

fn writer(profile: &SerializationProfile) -> Writer<'_> {
    Writer {
        out: Out {
            buf: String::new(),
            indent: profile.indent,
        },
        concrete: profile.concrete_part(),
    }
}

fn annotation(w: &mut Writer<'_>, depth: usize, doc: &AnnotationDoc, emit_base: bool) -> Result<(), AmlError> {
    match doc.base_uri.as_deref().filter(|_| emit_base) {
        Some(base) => {
            w.out.open(depth, "struct", &[attr("xml:base", base)], Body::Children);
            w.node(depth + 1, &doc.root, None)?;
            w.out.close(depth, "struct");
            Ok(())
        }
        None => w.node(depth, &doc.root, None),
    }
}

/// The annotation layer alone: the root `<struct>`, inside an `xml:base`
/// wrapper when the document has a base URI and the profile asks for it.
pub fn write_aml(doc: &AnnotationDoc, profile: &SerializationProfile) -> Result<String, AmlError> {
    let mut w = writer(profile);
    annotation(&mut w, 0, doc, profile.emit_base)?;
    Ok(w.out.buf)
}

fn document(w: &mut Writer<'_>, depth: usize, doc: &AnnotationDoc, emit_base: bool) -> Result<(), AmlError> {
    let attrs = if doc.doc_id.is_empty() { vec![] } else { vec![attr("id", &doc.doc_id)] };
    w.out.open(depth, "doc", &attrs, Body::Children);
    if doc.tokens.is_empty() {
        w.out.open(depth + 1, "s", &[], Body::Empty);
    } else {
        w.out.open(depth + 1, "s", &[], Body::Children);
        for t in &doc.tokens {
            let attrs = [attr("id", &t.id), attr("start", &t.char_start.to_string())];
            w.out.open(depth + 2, "w", &attrs, Body::Text(t.text.clone()));
        }
        w.out.close(depth + 1, "s");
    }
    annotation(w, depth + 1, doc, emit_base)?;
    w.out.close(depth, "doc");
    Ok(())
}

/// Tokens and annotation together in a `<doc>` element.
pub fn write_document(doc: &AnnotationDoc, profile: &SerializationProfile) -> Result<String, AmlError> {
    let mut w = writer(profile);
    document(&mut w, 0, doc, profile.emit_base)?;
    Ok(w.out.buf)
}

/// Documents inside a `<corpus>` element, in order.
pub fn write_corpus(docs: &[AnnotationDoc], profile: &SerializationProfile) -> Result<String, AmlError> {
    let mut w = writer(profile);
    if docs.is_empty() {
        w.out.open(0, "corpus", &[], Body::Empty);
        return Ok(w.out.buf);
    }
    w.out.open(0, "corpus", &[], Body::Children);
    for d in docs {
        document(&mut w, 1, d, profile.emit_base)?;
    }
    w.out.close(0, "corpus");
    Ok(w.out.buf)
}

/// One member of a `<corpus>`, indented one level: a `<doc>`, or the bare
/// annotation layer when `standoff` is set. For writers that emit the
/// corpus wrapper themselves while streaming.
pub fn write_corpus_member(doc: &AnnotationDoc, profile: &SerializationProfile, standoff: bool) -> Result<String, AmlError> {
    let mut w = writer(profile);
    if standoff {
        annotation(&mut w, 1, doc, profile.emit_base)?;
    } else {
        document(&mut w, 1, doc, profile.emit_base)?;
    }
    Ok(w.out.buf)
}
