use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use synpivot::aml::{AmlReader, SerializationProfile};
use synpivot::dep::{dep_to_pivot, parse_dep, parse_token_sidecar, DepError};
use synpivot::pivot::{tokens_from_spans, tokens_from_words, AnnotationDoc, Token};
use synpivot::ptb::{ptb_to_pivot, EncodingStyle, PtbReader, PtbTree, SentenceText};
use synpivot::registry::Dialect;
use synpivot::transduce::HeadRules;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Bracketed treebank trees.
    Ptb,
    /// `rel(head, dependent, introducer)` facts, one sentence per block.
    Dep,
    AmlVirtual,
    AmlConcrete,
}

impl Format {
    pub fn is_aml(self) -> bool {
        matches!(self, Format::AmlVirtual | Format::AmlConcrete)
    }

    /// Guess from a file extension: `.ptb`/`.mrg`, `.dep`, `.xml`/`.aml`.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "ptb" | "mrg" => Some(Format::Ptb),
            "dep" => Some(Format::Dep),
            "xml" | "aml" => Some(Format::AmlVirtual),
            _ => None,
        }
    }
}

/// Stdin for `None` or `-`.
pub fn open(path: Option<&Path>) -> Result<Box<dyn BufRead + Send>> {
    match path {
        None => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) if p == Path::new("-") => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) => Ok(Box::new(BufReader::new(
            File::open(p).with_context(|| format!("opening {}", p.display()))?,
        ))),
    }
}

pub fn display(path: Option<&Path>) -> String {
    path.map_or_else(|| "<stdin>".to_string(), |p| p.display().to_string())
}

/// Blank-line separated blocks with the line number each starts on.
pub struct Blocks<R> {
    input: R,
    line: usize,
}

impl<R: BufRead> Blocks<R> {
    pub fn new(input: R) -> Self {
        Blocks { input, line: 0 }
    }
}

impl<R: BufRead> Iterator for Blocks<R> {
    type Item = io::Result<(usize, String)>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut block = String::new();
        let mut first = 0;
        loop {
            let mut line = String::new();
            match self.input.read_line(&mut line) {
                Err(e) => return Some(Err(e)),
                Ok(0) => return (!block.is_empty()).then_some(Ok((first, block))),
                Ok(_) => {}
            }
            self.line += 1;
            if line.trim().is_empty() {
                if !block.is_empty() {
                    return Some(Ok((first, block)));
                }
                continue;
            }
            if block.is_empty() {
                first = self.line;
            }
            block.push_str(&line);
        }
    }
}

/// Everything needed to turn one input's sentences into pivots.
pub struct Side {
    pub format: Format,
    pub path: Option<PathBuf>,
    pub text: Option<PathBuf>,
    pub tokens: Option<PathBuf>,
    pub style: EncodingStyle,
    /// Vocabulary of the pivot's labels when fixed by the user.
    pub pivot: Option<Dialect>,
    pub ptb: Dialect,
    pub dep: Dialect,
    /// How AML input is read.
    pub profile: SerializationProfile,
}

impl Side {
    pub fn name(&self) -> String {
        display(self.path.as_deref())
    }

    /// Dialect the pivot's labels are in: the user's choice, else the
    /// treebank vocabulary for trees and the dependency one for flat docs.
    pub fn dialect_for(&self, doc: &AnnotationDoc) -> &Dialect {
        if let Some(d) = &self.pivot {
            return d;
        }
        match self.format {
            Format::Ptb => &self.ptb,
            Format::Dep => &self.dep,
            _ if is_flat(doc) => &self.dep,
            _ => &self.ptb,
        }
    }

    /// Short name of the built-in vocabulary that applies to `doc`.
    pub fn scheme_for(&self, doc: &AnnotationDoc) -> &'static str {
        match self.format {
            Format::Dep => "dep",
            Format::Ptb => "ptb",
            _ if is_flat(doc) => "dep",
            _ => "ptb",
        }
    }

    pub fn sentences(&self) -> Result<Sentences<'_>> {
        let input = open(self.path.as_deref())?;
        let units: Box<dyn Iterator<Item = Result<Raw>> + '_> = match self.format {
            Format::Ptb => Box::new(PtbReader::new(input).map(|t| t.map(Raw::Tree).map_err(anyhow::Error::from))),
            Format::Dep => Box::new(
                Blocks::new(input).map(|b| b.map(|(first, text)| Raw::Facts { first, text }).map_err(anyhow::Error::from)),
            ),
            _ => Box::new(AmlReader::new(input, &self.profile).map(|d| d.map(Raw::Doc).map_err(anyhow::Error::from))),
        };
        let text = match &self.text {
            Some(p) => Some(open(Some(p))?.lines()),
            None => None,
        };
        let tokens = match &self.tokens {
            Some(p) => Some(Blocks::new(open(Some(p))?)),
            None => None,
        };
        Ok(Sentences {
            units,
            text,
            tokens,
            count: 0,
            failed: false,
        })
    }

    /// The pivot for one sentence.
    pub fn pivot(&self, unit: &Unit, rules: &HeadRules) -> Result<AnnotationDoc> {
        let sidecar = || unit.tokens.as_ref().map(|t| t.as_ref().cloned().map_err(|e| anyhow!("{e:#}")));
        match &unit.raw {
            Raw::Tree(tree) => {
                let sentence = unit.text.as_deref().map(SentenceText::new);
                Ok(ptb_to_pivot(tree, rules, sentence.as_ref(), self.style)?)
            }
            Raw::Facts { first, text: block } => {
                let facts = parse_dep(block).map_err(|e| match e {
                    DepError::Syntax { line, message } => DepError::Syntax {
                        line: line + first - 1,
                        message,
                    },
                    e => e,
                })?;
                let tokens = match (sidecar(), &unit.text) {
                    (Some(t), _) => t?,
                    (None, Some(line)) => tokens_from_words(&line.split_whitespace().collect::<Vec<_>>()),
                    (None, None) => bail!("dependency facts need the sentence's words; pass --tokens or --text"),
                };
                Ok(dep_to_pivot(&facts, &tokens)?)
            }
            Raw::Doc(doc) => {
                let mut doc = doc.clone();
                if doc.tokens.is_empty() {
                    if let Some(t) = sidecar() {
                        doc.tokens = t?;
                    } else if let Some(line) = &unit.text {
                        doc.tokens = tokens_from_spans(&doc.root, line);
                    }
                }
                Ok(doc)
            }
        }
    }
}

/// A dependency-shaped pivot: an uncategorised root without child nodes.
pub fn is_flat(doc: &AnnotationDoc) -> bool {
    doc.root.category().is_none() && doc.root.child_nodes().is_empty()
}

pub enum Raw {
    Tree(PtbTree),
    Facts { first: usize, text: String },
    Doc(AnnotationDoc),
}

/// One input sentence with whatever side files supply for it.
pub struct Unit {
    /// 1-based.
    pub number: usize,
    raw: Raw,
    text: Option<String>,
    tokens: Option<Result<Vec<Token>>>,
}

pub struct Sentences<'a> {
    units: Box<dyn Iterator<Item = Result<Raw>> + 'a>,
    text: Option<io::Lines<Box<dyn BufRead + Send>>>,
    tokens: Option<Blocks<Box<dyn BufRead + Send>>>,
    count: usize,
    failed: bool,
}

impl Sentences<'_> {
    /// Up to `n` sentences, plus the read error that cut the batch short.
    /// Nothing more is read after an error.
    pub fn chunk(&mut self, n: usize) -> (Vec<Unit>, Option<anyhow::Error>) {
        let mut out = Vec::with_capacity(n);
        while out.len() < n && !self.failed {
            match self.next() {
                Some(Ok(u)) => out.push(u),
                Some(Err(e)) => {
                    self.failed = true;
                    return (out, Some(e));
                }
                None => break,
            }
        }
        (out, None)
    }
}

impl Iterator for Sentences<'_> {
    type Item = Result<Unit>;

    fn next(&mut self) -> Option<Self::Item> {
        let raw = match self.units.next()? {
            Ok(r) => r,
            Err(e) => return Some(Err(e.context(format!("reading sentence {}", self.count + 1)))),
        };
        self.count += 1;
        let text = match self.text.as_mut().map(next_nonblank) {
            Some(Err(e)) => return Some(Err(e)),
            Some(Ok(t)) => t,
            None => None,
        };
        let number = self.count;
        let tokens = self.tokens.as_mut().map(|blocks| match blocks.next() {
            Some(Ok((first, block))) => parse_token_sidecar(&block)
                .map_err(|e| anyhow!("token file, block at line {first}: {e}"))
                .map(|mut s| s.pop().unwrap_or_default()),
            Some(Err(e)) => Err(e.into()),
            None => Err(anyhow!("token file has no block for sentence {number}")),
        });
        Some(Ok(Unit { number, raw, text, tokens }))
    }
}

fn next_nonblank(lines: &mut io::Lines<Box<dyn BufRead + Send>>) -> Result<Option<String>> {
    for line in lines {
        let line = line?;
        if !line.trim().is_empty() {
            return Ok(Some(line));
        }
    }
    Ok(None)
}
