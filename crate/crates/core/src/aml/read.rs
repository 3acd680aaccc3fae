use std::io::BufRead;

use super::xml::{Child, Elem, ElemStream};
use super::{parse_span_href, AmlError, Concrete, SerializationProfile};
use crate::pivot::{Alt, AnnotationDoc, Brack, Feat, FeatValue, Node, NodeItem, Rel, Seg, Token};
use crate::registry::{InstantiationStyle, RegistryError};

struct Ctx<'p> {
    concrete: Option<&'p Concrete>,
}

fn unknown_element(e: &Elem) -> AmlError {
    AmlError::UnknownElement {
        name: e.name.clone(),
        line: e.line,
        column: e.column,
    }
}

fn unknown_attribute(e: &Elem, name: &str) -> AmlError {
    AmlError::UnknownAttribute {
        element: e.name.clone(),
        name: name.to_string(),
        line: e.line,
        column: e.column,
    }
}

fn required<'e>(e: &'e Elem, name: &str) -> Result<&'e str, AmlError> {
    e.attr(name).ok_or_else(|| AmlError::MissingAttribute {
        element: e.name.clone(),
        attribute: name.to_string(),
        line: e.line,
        column: e.column,
    })
}

fn only_attributes(e: &Elem, allowed: &[&str]) -> Result<(), AmlError> {
    match e.attrs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(unknown_attribute(e, k)),
        None => Ok(()),
    }
}

/// Text-only content: child elements are rejected.
fn text_only(e: &Elem) -> Result<String, AmlError> {
    if let Some(child) = e.elements().next() {
        return Err(child.invalid(format!("<{}> may not contain elements", e.name)));
    }
    Ok(e.text())
}

fn no_content(e: &Elem) -> Result<(), AmlError> {
    if let Some(child) = e.elements().next() {
        return Err(child.invalid(format!("<{}> must be empty", e.name)));
    }
    if !e.text().trim().is_empty() {
        return Err(e.invalid(format!("<{}> must be empty", e.name)));
    }
    Ok(())
}

impl Ctx<'_> {
    fn label(&self, e: &Elem, r: Result<String, RegistryError>) -> Result<String, AmlError> {
        r.map_err(|source| AmlError::Label {
            line: e.line,
            column: e.column,
            source,
        })
    }

    /// Feature from markup names back to pivot names.
    fn feat(&self, e: &Elem, key: &str, value: FeatValue) -> Result<Feat, AmlError> {
        let Some(c) = self.concrete else {
            return Ok(Feat {
                key: key.to_string(),
                value,
            });
        };
        let key = self.label(e, c.in_label(key))?;
        let value = match value {
            FeatValue::Inline(v) if c.renames_values(&key) => FeatValue::Inline(self.label(e, c.in_label(&v))?),
            other => other,
        };
        Ok(Feat { key, value })
    }

    fn style(&self, name: &str) -> Option<InstantiationStyle> {
        self.concrete.and_then(|c| c.target.style(name))
    }

    /// Items from the element children of a container; whitespace text is
    /// skipped, other text is an error.
    fn items(&self, parent: &Elem) -> Result<Vec<NodeItem>, AmlError> {
        let mut out = Vec::new();
        for child in &parent.children {
            match child {
                Child::Text(t) if t.trim().is_empty() => {}
                Child::Text(t) => {
                    return Err(parent.invalid(format!("unexpected text `{}` in <{}>", t.trim(), parent.name)))
                }
                Child::Elem(e) => self.item(e, &mut out)?,
            }
        }
        Ok(out)
    }

    fn item(&self, e: &Elem, out: &mut Vec<NodeItem>) -> Result<(), AmlError> {
        let item = match e.name.as_str() {
            "struct" => NodeItem::Node(self.node(e)?),
            "feat" => {
                only_attributes(e, &["type", "target"])?;
                let key = required(e, "type")?;
                let value = match e.attr("target") {
                    Some(t) => {
                        no_content(e)?;
                        FeatValue::Target(t.to_string())
                    }
                    None => FeatValue::Inline(text_only(e)?),
                };
                NodeItem::Feat(self.feat(e, key, value)?)
            }
            "rel" => {
                only_attributes(e, &["type", "head", "dependent", "introducer", "initial"])?;
                no_content(e)?;
                let mut label = required(e, "type")?.to_string();
                if let Some(c) = self.concrete {
                    label = self.label(e, c.in_label(&label))?;
                }
                let opt = |k: &str| e.attr(k).map(str::to_string);
                NodeItem::Rel(Rel {
                    label,
                    head: required(e, "head")?.to_string(),
                    dependent: opt("dependent"),
                    introducer: opt("introducer"),
                    initial: opt("initial"),
                })
            }
            "seg" => {
                only_attributes(e, &["xlink:href", "target"])?;
                no_content(e)?;
                match (e.attr("xlink:href"), e.attr("target")) {
                    (Some(href), None) => NodeItem::Seg(Seg::Span(
                        parse_span_href(href).ok_or_else(|| e.invalid(format!("cannot read anchor `{href}`")))?,
                    )),
                    (None, Some(t)) => NodeItem::Seg(Seg::Token(t.to_string())),
                    _ => return Err(e.invalid("<seg> needs exactly one of `xlink:href` and `target`")),
                }
            }
            "brack" => {
                only_attributes(e, &[])?;
                NodeItem::Brack(Brack { items: self.items(e)? })
            }
            "alt" => {
                only_attributes(e, &[])?;
                let mut alternatives = Vec::new();
                for child in e.elements() {
                    if child.name == "brack" {
                        only_attributes(child, &[])?;
                        alternatives.push(self.items(child)?);
                    } else {
                        let mut one = Vec::new();
                        self.item(child, &mut one)?;
                        alternatives.push(one);
                    }
                }
                if !e.text().trim().is_empty() {
                    return Err(e.invalid("unexpected text in <alt>"));
                }
                NodeItem::Alt(Alt { alternatives })
            }
            name => return self.concrete_item(e, name, out),
        };
        out.push(item);
        Ok(())
    }

    /// Dialect-specific elements: grouping wrappers and styled features.
    fn concrete_item(&self, e: &Elem, name: &str, out: &mut Vec<NodeItem>) -> Result<(), AmlError> {
        let Some(c) = self.concrete else {
            return Err(unknown_element(e));
        };
        let exp = c.target.expansions();
        if exp.group_features_and_relations && (name == exp.feature_group || name == exp.relation_group) {
            only_attributes(e, &[])?;
            out.extend(self.items(e)?);
            return Ok(());
        }
        let feat = match self.style(name) {
            Some(InstantiationStyle::Element) => {
                only_attributes(e, &[])?;
                self.feat(e, name, FeatValue::Inline(text_only(e)?))?
            }
            Some(InstantiationStyle::ValuedElement) => {
                only_attributes(e, &["value"])?;
                no_content(e)?;
                let v = e.attr("value").unwrap_or("");
                self.feat(e, name, FeatValue::Inline(v.to_string()))?
            }
            _ if name == exp.typed_element => {
                only_attributes(e, &["type"])?;
                let key = required(e, "type")?;
                self.feat(e, key, FeatValue::Inline(text_only(e)?))?
            }
            _ => return Err(unknown_element(e)),
        };
        out.push(NodeItem::Feat(feat));
        Ok(())
    }

    fn node(&self, e: &Elem) -> Result<Node, AmlError> {
        let mut node = Node::default();
        let mut lead = Vec::new();
        for (k, v) in &e.attrs {
            match k.as_str() {
                "id" => node.id = Some(v.clone()),
                "ref" => node.reference = Some(v.clone()),
                k if self.style(k) == Some(InstantiationStyle::Attribute) => {
                    lead.push(NodeItem::Feat(self.feat(e, k, FeatValue::Inline(v.clone()))?));
                }
                k => return Err(unknown_attribute(e, k)),
            }
        }
        lead.extend(self.items(e)?);
        node.content = lead;
        Ok(node)
    }

    /// The root struct, unwrapping an `xml:base` wrapper.
    fn annotation(&self, e: &Elem) -> Result<(Node, Option<String>), AmlError> {
        let Some(base) = e.attr("xml:base") else {
            return Ok((self.node(e)?, None));
        };
        let mut stripped = e.clone();
        stripped.attrs.retain(|(k, _)| k != "xml:base");
        let node = self.node(&stripped)?;
        let unwrap = node.id.is_none() && node.reference.is_none() && matches!(node.content.as_slice(), [NodeItem::Node(_)]);
        let root = match node.content.as_slice() {
            [NodeItem::Node(inner)] if unwrap => inner.clone(),
            _ => node,
        };
        Ok((root, Some(base.to_string())))
    }

    fn tokens(&self, s: &Elem) -> Result<Vec<Token>, AmlError> {
        only_attributes(s, &["id"])?;
        let mut tokens: Vec<Token> = Vec::new();
        for child in &s.children {
            let w = match child {
                Child::Text(t) if t.trim().is_empty() => continue,
                Child::Text(_) => return Err(s.invalid("unexpected text in <s>")),
                Child::Elem(w) if w.name == "w" => w,
                Child::Elem(other) => return Err(unknown_element(other)),
            };
            only_attributes(w, &["id", "start"])?;
            let id = required(w, "id")?;
            let start = match w.attr("start") {
                Some(s) => s.trim().parse().map_err(|_| w.invalid(format!("bad start offset `{s}`")))?,
                None => tokens.last().map_or(1, |t| t.char_end() + 1),
            };
            tokens.push(Token::new(id, text_only(w)?, start));
        }
        Ok(tokens)
    }

    fn doc(&self, e: &Elem) -> Result<AnnotationDoc, AmlError> {
        match e.name.as_str() {
            "struct" => {
                let (root, base) = self.annotation(e)?;
                let mut doc = AnnotationDoc::new("", Vec::new(), root);
                doc.base_uri = base;
                Ok(doc)
            }
            "doc" => {
                only_attributes(e, &["id"])?;
                let mut tokens = None;
                let mut annotation = None;
                for child in &e.children {
                    match child {
                        Child::Text(t) if t.trim().is_empty() => {}
                        Child::Text(_) => return Err(e.invalid("unexpected text in <doc>")),
                        Child::Elem(s) if s.name == "s" && tokens.is_none() => tokens = Some(self.tokens(s)?),
                        Child::Elem(st) if st.name == "struct" && annotation.is_none() => {
                            annotation = Some(self.annotation(st)?)
                        }
                        Child::Elem(other) => return Err(unknown_element(other)),
                    }
                }
                let (root, base) = annotation.ok_or_else(|| e.invalid("<doc> has no <struct>"))?;
                let mut doc = AnnotationDoc::new(e.attr("id").unwrap_or(""), tokens.unwrap_or_default(), root);
                doc.base_uri = base;
                Ok(doc)
            }
            _ => Err(unknown_element(e)),
        }
    }
}

/// Streams documents from XML: a single `<struct>` or `<doc>`, or every
/// child of a `<corpus>`.
pub struct AmlReader<'p, R: BufRead> {
    stream: ElemStream<R>,
    profile: &'p SerializationProfile,
}

impl<'p, R: BufRead> AmlReader<'p, R> {
    pub fn new(input: R, profile: &'p SerializationProfile) -> Self {
        AmlReader {
            stream: ElemStream::new(input),
            profile,
        }
    }
}

impl<R: BufRead> Iterator for AmlReader<'_, R> {
    type Item = Result<AnnotationDoc, AmlError>;

    fn next(&mut self) -> Option<Self::Item> {
        let elem = self.stream.next_elem()?;
        let ctx = Ctx {
            concrete: self.profile.concrete_part(),
        };
        Some(elem.and_then(|e| ctx.doc(&e)))
    }
}

/// Exactly one document.
pub fn read_aml(text: &str, profile: &SerializationProfile) -> Result<AnnotationDoc, AmlError> {
    let mut docs = read_corpus(text, profile)?;
    match docs.len() {
        1 => Ok(docs.remove(0)),
        n => Err(AmlError::Invalid {
            line: 1,
            column: 1,
            message: format!("expected one document, found {n}"),
        }),
    }
}

/// A bare annotation layer over tokens supplied separately. Tokens in the
/// markup itself take precedence.
pub fn read_aml_standoff(text: &str, profile: &SerializationProfile, tokens: &[Token]) -> Result<AnnotationDoc, AmlError> {
    let mut doc = read_aml(text, profile)?;
    if doc.tokens.is_empty() {
        doc.tokens = tokens.to_vec();
    }
    Ok(doc)
}

pub fn read_corpus(text: &str, profile: &SerializationProfile) -> Result<Vec<AnnotationDoc>, AmlError> {
    AmlReader::new(text.as_bytes(), profile).collect()
}
