//! A minimal element tree over quick-xml events, with line and column
//! tracking for error messages.

use std::io::{self, BufRead, Read};

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};

use super::AmlError;

#[derive(Debug, Clone)]
pub(crate) struct Elem {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Child>,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum Child {
    Elem(Elem),
    Text(String),
}

impl Elem {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|c| match c {
                Child::Text(t) => Some(t.as_str()),
                Child::Elem(_) => None,
            })
            .collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = &Elem> {
        self.children.iter().filter_map(|c| match c {
            Child::Elem(e) => Some(e),
            Child::Text(_) => None,
        })
    }

    pub fn invalid(&self, message: impl Into<String>) -> AmlError {
        AmlError::Invalid {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

/// Records the byte offset of every newline the parser consumes.
pub(crate) struct Tracked<R> {
    inner: R,
    offset: u64,
    newlines: Vec<u64>,
}

impl<R: BufRead> Read for Tracked<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = {
            let avail = self.inner.fill_buf()?;
            let n = avail.len().min(buf.len());
            buf[..n].copy_from_slice(&avail[..n]);
            n
        };
        self.consume(n);
        Ok(n)
    }
}

impl<R: BufRead> BufRead for Tracked<R> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        self.inner.fill_buf()
    }

    fn consume(&mut self, amt: usize) {
        if let Ok(buf) = self.inner.fill_buf() {
            let base = self.offset;
            self.newlines.extend(
                buf[..amt.min(buf.len())]
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b == b'\n')
                    .map(|(i, _)| base + i as u64),
            );
        }
        self.offset += amt as u64;
        self.inner.consume(amt);
    }
}

impl<R> Tracked<R> {
    fn locate(&self, pos: u64) -> (usize, usize) {
        let before = self.newlines.partition_point(|&p| p < pos);
        let line_start = if before == 0 { 0 } else { self.newlines[before - 1] + 1 };
        (before + 1, (pos - line_start) as usize + 1)
    }
}

/// Pull parser producing complete elements. With `split_corpus`, a
/// top-level `<corpus>` is not returned itself; each of its element
/// children is returned in turn.
pub(crate) struct ElemStream<R: BufRead> {
    reader: Reader<Tracked<R>>,
    buf: Vec<u8>,
    stack: Vec<Elem>,
    in_corpus: bool,
    seen_root: bool,
    done: bool,
}

impl<R: BufRead> ElemStream<R> {
    pub fn new(input: R) -> Self {
        let reader = Reader::from_reader(Tracked {
            inner: input,
            offset: 0,
            newlines: Vec::new(),
        });
        ElemStream {
            reader,
            buf: Vec::new(),
            stack: Vec::new(),
            in_corpus: false,
            seen_root: false,
            done: false,
        }
    }

    fn error_at(&self, pos: u64, message: impl Into<String>) -> AmlError {
        let (line, column) = self.reader.get_ref().locate(pos);
        AmlError::Xml {
            line,
            column,
            message: message.into(),
        }
    }

    fn start(&self, e: &BytesStart<'_>, pos: u64) -> Result<Elem, AmlError> {
        let (line, column) = self.reader.get_ref().locate(pos);
        let mut attrs = Vec::new();
        for a in e.attributes() {
            let a = a.map_err(|err| self.error_at(pos, err.to_string()))?;
            let value = a
                .normalized_value(XmlVersion::Implicit1_0)
                .map_err(|err| self.error_at(pos, err.to_string()))?;
            attrs.push((a.key.0.to_string(), value.into_owned()));
        }
        Ok(Elem {
            name: e.name().0.to_string(),
            attrs,
            children: Vec::new(),
            line,
            column,
        })
    }

    fn push_text(&mut self, text: &str, pos: u64) -> Result<(), AmlError> {
        match self.stack.last_mut() {
            Some(top) => {
                if let Some(Child::Text(t)) = top.children.last_mut() {
                    t.push_str(text);
                } else {
                    top.children.push(Child::Text(text.to_string()));
                }
                Ok(())
            }
            None if text.trim().is_empty() => Ok(()),
            None => Err(self.error_at(pos, "text outside the root element")),
        }
    }

    /// A finished element: attach it to its parent or hand it out.
    fn finish(&mut self, elem: Elem) -> Result<Option<Elem>, AmlError> {
        match self.stack.last_mut() {
            Some(parent) => {
                parent.children.push(Child::Elem(elem));
                Ok(None)
            }
            None => Ok(Some(elem)),
        }
    }

    fn open(&mut self, elem: Elem, pos: u64) -> Result<(), AmlError> {
        if self.stack.is_empty() && !self.in_corpus {
            if self.seen_root {
                return Err(self.error_at(pos, "more than one root element"));
            }
            self.seen_root = true;
            if elem.name == "corpus" {
                if let Some((k, _)) = elem.attrs.first() {
                    return Err(AmlError::UnknownAttribute {
                        element: "corpus".into(),
                        name: k.clone(),
                        line: elem.line,
                        column: elem.column,
                    });
                }
                self.in_corpus = true;
                return Ok(());
            }
        }
        self.stack.push(elem);
        Ok(())
    }

    pub fn next_elem(&mut self) -> Option<Result<Elem, AmlError>> {
        if self.done {
            return None;
        }
        let out = self.pump();
        if !matches!(out, Some(Ok(_))) {
            self.done = true;
        }
        out
    }

    fn pump(&mut self) -> Option<Result<Elem, AmlError>> {
        loop {
            self.buf.clear();
            let pos = self.reader.buffer_position();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev.into_owned(),
                Err(e) => {
                    let pos = self.reader.error_position();
                    return Some(Err(self.error_at(pos, e.to_string())));
                }
            };
            let step: Result<Option<Elem>, AmlError> = match event {
                Event::Start(e) => self.start(&e, pos).and_then(|el| self.open(el, pos)).map(|_| None),
                Event::Empty(e) => match self.start(&e, pos) {
                    Ok(el) if self.stack.is_empty() && !self.in_corpus && el.name == "corpus" => {
                        self.open(el, pos).map(|_| {
                            self.in_corpus = false;
                            None
                        })
                    }
                    Ok(el) => self.open(el, pos).and_then(|_| {
                        let el = self.stack.pop().expect("just pushed");
                        self.finish(el)
                    }),
                    Err(e) => Err(e),
                },
                Event::End(_) => match self.stack.pop() {
                    Some(el) => self.finish(el),
                    None => {
                        // closing </corpus>
                        self.in_corpus = false;
                        Ok(None)
                    }
                },
                Event::Text(t) => {
                    let text = t.xml10_content().into_owned();
                    self.push_text(&text, pos).map(|_| None)
                }
                Event::CData(c) => {
                    let text = c.into_inner().into_owned();
                    self.push_text(&text, pos).map(|_| None)
                }
                Event::GeneralRef(r) => {
                    let resolved = match r.resolve_char_ref() {
                        Ok(Some(ch)) => Ok(ch.to_string()),
                        Ok(None) => resolve_predefined_entity(&r)
                            .map(str::to_string)
                            .ok_or_else(|| self.error_at(pos, format!("unknown entity `&{};`", &*r))),
                        Err(e) => Err(self.error_at(pos, e.to_string())),
                    };
                    resolved.and_then(|s| self.push_text(&s, pos)).map(|_| None)
                }
                Event::Eof => {
                    if let Some(open) = self.stack.first() {
                        return Some(Err(AmlError::Xml {
                            line: open.line,
                            column: open.column,
                            message: format!("<{}> is never closed", open.name),
                        }));
                    }
                    if self.in_corpus {
                        return Some(Err(self.error_at(pos, "<corpus> is never closed")));
                    }
                    if !self.seen_root {
                        return Some(Err(self.error_at(pos, "no root element")));
                    }
                    return None;
                }
                Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => Ok(None),
            };
            match step {
                Ok(Some(el)) => return Some(Ok(el)),
                Ok(None) => {}
                Err(e) => return Some(Err(e)),
            }
        }
    }
}
