//! Predicate-style dependency facts, `subj(intend, Paul, _)`, and their flat
//! pivot encoding.

use std::fmt;

use thiserror::Error;

use crate::pivot::{AnnotationDoc, Node, NodeItem, Rel, Resolved, Token};
use crate::registry::{Dialect, RegistryError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DepError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("`{fact}`: argument `{arg}` matches no token")]
    Unmatched { fact: String, arg: String },
    #[error("`{fact}`: argument `{arg}` matches several tokens ({candidates})")]
    Ambiguous { fact: String, arg: String, candidates: String },
    #[error("rel `{label}`: endpoint `{id}` does not resolve to a single token")]
    Unrenderable { label: String, id: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// `relation(head, dependent, introducer, ...)`. `None` is the explicit empty
/// slot `_`; the number of written slots is kept.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DepFact {
    pub relation: String,
    pub head: String,
    /// Slots after the head, in order.
    pub args: Vec<Option<String>>,
}

impl DepFact {
    pub fn new(relation: impl Into<String>, head: impl Into<String>) -> Self {
        DepFact {
            relation: relation.into(),
            head: head.into(),
            args: Vec::new(),
        }
    }

    pub fn with_arg(mut self, arg: Option<&str>) -> Self {
        self.args.push(arg.map(str::to_string));
        self
    }

    pub fn dependent(&self) -> Option<&str> {
        self.args.first().and_then(|a| a.as_deref())
    }

    pub fn introducer(&self) -> Option<&str> {
        self.args.get(1).and_then(|a| a.as_deref())
    }

    /// Fourth slot: a thematic role, stored but not interpreted.
    pub fn initial(&self) -> Option<&str> {
        self.args.get(2).and_then(|a| a.as_deref())
    }
}

impl fmt::Display for DepFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}", self.relation, self.head)?;
        for a in &self.args {
            write!(f, ", {}", a.as_deref().unwrap_or("_"))?;
        }
        f.write_str(")")
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':'))
}

fn parse_line(line: &str, number: usize) -> Result<DepFact, DepError> {
    let err = |message: String| DepError::Syntax { line: number, message };
    let open = line.find('(').ok_or_else(|| err("expected `relation(head, ...)`".into()))?;
    let relation = line[..open].trim();
    if !is_ident(relation) {
        return Err(err(format!("bad relation name `{relation}`")));
    }
    let rest = line[open + 1..].trim_end();
    let inner = rest.strip_suffix(')').ok_or_else(|| err("missing `)`".into()))?;
    if inner.contains('(') || inner.contains(')') {
        return Err(err("nested parentheses".into()));
    }
    let mut args = inner.split(',').map(str::trim);
    let head = args.next().unwrap_or("");
    if head.is_empty() || head == "_" {
        return Err(err("the head slot may not be empty".into()));
    }
    let mut fact = DepFact::new(relation, head);
    for a in args {
        match a {
            "" => return Err(err("empty argument".into())),
            "_" => fact.args.push(None),
            a if a.chars().any(char::is_whitespace) => return Err(err(format!("argument `{a}` contains spaces"))),
            a => fact.args.push(Some(a.to_string())),
        }
    }
    if head.chars().any(char::is_whitespace) {
        return Err(err(format!("argument `{head}` contains spaces")));
    }
    Ok(fact)
}

/// One fact per non-blank line.
pub fn parse_dep(text: &str) -> Result<Vec<DepFact>, DepError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(l.trim(), i + 1))
        .collect()
}

/// Sentences separated by blank lines. Line numbers in errors count from the
/// start of `text`.
pub fn parse_dep_corpus(text: &str) -> Result<Vec<Vec<DepFact>>, DepError> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            continue;
        }
        current.push(parse_line(line, i + 1)?);
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}

/// One fact per line, newline-terminated.
pub fn render_dep(facts: &[DepFact]) -> String {
    facts.iter().map(|f| format!("{f}\n")).collect()
}

/// Token sidecar: `id<TAB>form` per line, sentences separated by blank
/// lines. Offsets assume single spaces between words.
pub fn parse_token_sidecar(text: &str) -> Result<Vec<Vec<Token>>, DepError> {
    let mut out = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (id, form) = line.split_once('\t').ok_or_else(|| DepError::Syntax {
            line: i + 1,
            message: "expected `id<TAB>form`".into(),
        })?;
        let start = current.last().map_or(1, |t| t.char_end() + 1);
        current.push(Token::new(id.trim(), form.trim(), start));
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}

pub fn render_token_sidecar(tokens: &[Token]) -> String {
    tokens.iter().map(|t| format!("{}\t{}\n", t.id, t.text)).collect()
}

const SUFFIXES: [&str; 5] = ["s", "es", "d", "ed", "ing"];

/// Token position an argument denotes: a token id, else the unique token
/// with that exact form, else the unique token extending it by an
/// inflectional suffix.
fn match_arg(arg: &str, tokens: &[Token]) -> Result<usize, Vec<usize>> {
    if let Some(p) = tokens.iter().position(|t| t.id == arg) {
        return Ok(p);
    }
    let exact: Vec<usize> = (0..tokens.len()).filter(|&i| tokens[i].text == arg).collect();
    if exact.len() == 1 {
        return Ok(exact[0]);
    }
    if exact.len() > 1 {
        return Err(exact);
    }
    let inflected: Vec<usize> = (0..tokens.len())
        .filter(|&i| {
            tokens[i]
                .text
                .strip_prefix(arg)
                .is_some_and(|rest| SUFFIXES.contains(&rest))
        })
        .collect();
    match inflected.len() {
        1 => Ok(inflected[0]),
        _ => Err(inflected),
    }
}

fn resolve_arg(fact: &DepFact, arg: &str, tokens: &[Token]) -> Result<String, DepError> {
    match match_arg(arg, tokens) {
        Ok(p) => Ok(tokens[p].id.clone()),
        Err(c) if c.is_empty() => Err(DepError::Unmatched {
            fact: fact.to_string(),
            arg: arg.to_string(),
        }),
        Err(c) => Err(DepError::Ambiguous {
            fact: fact.to_string(),
            arg: arg.to_string(),
            candidates: c.iter().map(|&p| tokens[p].id.as_str()).collect::<Vec<_>>().join(", "),
        }),
    }
}

/// A single anonymous root holding one rel per fact, endpoints as token ids.
pub fn dep_to_pivot(facts: &[DepFact], tokens: &[Token]) -> Result<AnnotationDoc, DepError> {
    let mut root = Node::anonymous();
    for f in facts {
        let mut rel = Rel::new(f.relation.clone(), resolve_arg(f, &f.head, tokens)?);
        if let Some(d) = f.dependent() {
            rel.dependent = Some(resolve_arg(f, d, tokens)?);
        }
        if let Some(i) = f.introducer() {
            rel.introducer = Some(resolve_arg(f, i, tokens)?);
        }
        rel.initial = f.initial().map(str::to_string);
        root.content.push(NodeItem::Rel(rel));
    }
    Ok(AnnotationDoc::new("", tokens.to_vec(), root))
}

/// One fact per rel of the default reading, ordered by head then dependent
/// position. Arguments are word forms when the form leads back to the same
/// token, token ids otherwise; labels go from `source`'s vocabulary to
/// `target`'s. Always three slots, four when a role is present.
pub fn pivot_to_dep(doc: &AnnotationDoc, source: &Dialect, target: &Dialect) -> Result<Vec<DepFact>, DepError> {
    let index = doc.index();
    let position = |label: &str, id: &str| -> Result<usize, DepError> {
        let unrenderable = || DepError::Unrenderable {
            label: label.to_string(),
            id: id.to_string(),
        };
        match index.resolve(id).map_err(|_| unrenderable())? {
            Resolved::Token(_) => Ok(index.token_position(id).expect("resolved token")),
            Resolved::Node(n) => {
                let referent = index.referent(n).map_err(|_| unrenderable())?;
                match index.dominated_tokens(referent).as_slice() {
                    [p] => Ok(*p),
                    _ => Err(unrenderable()),
                }
            }
        }
    };
    let render = |p: usize| {
        let form = &doc.tokens[p].text;
        if match_arg(form, &doc.tokens) == Ok(p) && form != "_" && !form.contains([',', '(', ')']) {
            form.clone()
        } else {
            doc.tokens[p].id.clone()
        }
    };
    let mut rows = Vec::new();
    for r in doc.all_rels() {
        let h = position(&r.label, &r.head)?;
        let d = r.dependent.as_deref().map(|d| position(&r.label, d)).transpose()?;
        let i = r.introducer.as_deref().map(|i| position(&r.label, i)).transpose()?;
        let mut fact = DepFact::new(target.translate_from(source, &r.label)?, render(h));
        fact.args.push(d.map(render));
        fact.args.push(i.map(render));
        if let Some(role) = &r.initial {
            fact.args.push(Some(role.clone()));
        }
        rows.push(((h, d.unwrap_or(usize::MAX)), fact));
    }
    rows.sort_by_key(|(k, _)| *k);
    Ok(rows.into_iter().map(|(_, f)| f).collect())
}
