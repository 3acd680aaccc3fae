//! XML renderings of the pivot. Virtual markup uses only the skeleton
//! elements (`struct`, `feat`, `rel`, `seg`, `brack`, `alt`); concrete markup
//! is shaped by a target [`Dialect`]: local names, per-feature
//! instantiation styles and optional grouping of features and relations.
//!
//! Three container shapes are read and written:
//!
//! * a bare annotation layer, `<struct>...</struct>`, optionally wrapped in a
//!   `<struct xml:base="...">`;
//! * a document, `<doc id="..."><s><w id="w1" start="1">Paul</w>...</s><struct>...</struct></doc>`,
//!   which carries the tokens as well;
//! * a corpus, `<corpus>` holding any number of documents or bare layers.

mod read;
mod write;
mod xml;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::registry::{Dialect, Registry, RegistryError};

pub use read::{read_aml, read_aml_standoff, read_corpus, AmlReader};
pub use write::{write_aml, write_corpus, write_corpus_member, write_document};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmlError {
    #[error("line {line}, column {column}: {message}")]
    Xml { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: unknown element <{name}>")]
    UnknownElement { name: String, line: usize, column: usize },
    #[error("line {line}, column {column}: unknown attribute `{name}` on <{element}>")]
    UnknownAttribute {
        element: String,
        name: String,
        line: usize,
        column: usize,
    },
    #[error("line {line}, column {column}: <{element}> needs a `{attribute}` attribute")]
    MissingAttribute {
        element: String,
        attribute: String,
        line: usize,
        column: usize,
    },
    #[error("line {line}, column {column}: {message}")]
    Invalid { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: {source}")]
    Label {
        line: usize,
        column: usize,
        source: RegistryError,
    },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// Vocabulary bridge for concrete markup: pivot labels are in `pivot`'s
/// vocabulary, the markup in `target`'s.
#[derive(Debug, Clone)]
pub struct Concrete {
    pub pivot: Dialect,
    pub target: Dialect,
    /// Registry ids of feature keys whose values are themselves labels.
    value_keys: BTreeSet<String>,
}

impl Concrete {
    pub fn new(pivot: Dialect, target: Dialect, registry: &Registry) -> Self {
        let value_keys = registry
            .categories()
            .filter(|c| c.values.is_some())
            .map(|c| c.id.clone())
            .collect();
        Concrete {
            pivot,
            target,
            value_keys,
        }
    }

    fn out_label(&self, label: &str) -> Result<String, RegistryError> {
        self.target.translate_from(&self.pivot, label).map(str::to_string)
    }

    fn in_label(&self, local: &str) -> Result<String, RegistryError> {
        self.pivot.translate_from(&self.target, local).map(str::to_string)
    }

    /// True when values of this pivot-side key are renamed too.
    fn renames_values(&self, pivot_key: &str) -> bool {
        self.pivot
            .normalize(pivot_key)
            .is_ok_and(|id| self.value_keys.contains(id))
    }
}

#[derive(Debug, Clone)]
pub enum Mode {
    Virtual,
    Concrete(Box<Concrete>),
}

#[derive(Debug, Clone)]
pub struct SerializationProfile {
    pub mode: Mode,
    /// Spaces per nesting level.
    pub indent: usize,
    /// Write the document's base URI as an `xml:base` wrapper.
    pub emit_base: bool,
}

impl SerializationProfile {
    pub fn virtual_aml() -> Self {
        SerializationProfile {
            mode: Mode::Virtual,
            indent: 2,
            emit_base: true,
        }
    }

    pub fn concrete(pivot: Dialect, target: Dialect, registry: &Registry) -> Self {
        SerializationProfile {
            mode: Mode::Concrete(Box::new(Concrete::new(pivot, target, registry))),
            indent: 2,
            emit_base: true,
        }
    }

    pub fn with_indent(mut self, indent: usize) -> Self {
        self.indent = indent;
        self
    }

    pub fn with_emit_base(mut self, emit_base: bool) -> Self {
        self.emit_base = emit_base;
        self
    }

    fn concrete_part(&self) -> Option<&Concrete> {
        match &self.mode {
            Mode::Virtual => None,
            Mode::Concrete(c) => Some(c),
        }
    }
}

impl Default for SerializationProfile {
    fn default() -> Self {
        SerializationProfile::virtual_aml()
    }
}

/// `xptr(substring(path,start,len))`
pub(crate) fn span_href(span: &crate::pivot::CharSpan) -> String {
    format!("xptr(substring({},{},{}))", span.path, span.start, span.len)
}

pub(crate) fn parse_span_href(href: &str) -> Option<crate::pivot::CharSpan> {
    let inner = href.trim().strip_prefix("xptr(substring(")?.strip_suffix("))")?;
    let mut parts = inner.rsplitn(3, ',');
    let len = parts.next()?.trim().parse().ok()?;
    let start = parts.next()?.trim().parse().ok()?;
    let path = parts.next()?.trim();
    if path.is_empty() {
        return None;
    }
    Some(crate::pivot::CharSpan {
        path: path.to_string(),
        start,
        len,
    })
}
