use std::collections::VecDeque;
use std::io::BufRead;

use super::{PtbError, PtbTree};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, first_line: usize) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: first_line,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    /// Next token with the position of its first character.
    fn next(&mut self) -> Option<(Tok, usize, usize)> {
        while self.chars.peek().is_some_and(|c| c.is_whitespace()) {
            self.bump();
        }
        let (line, column) = (self.line, self.column);
        let tok = match self.chars.peek()? {
            '(' => {
                self.bump();
                Tok::Open
            }
            ')' => {
                self.bump();
                Tok::Close
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Tok::Atom(s)
            }
        };
        Some((tok, line, column))
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> PtbError {
    PtbError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok, usize, usize)>,
}

impl Parser<'_> {
    fn next(&mut self) -> Option<(Tok, usize, usize)> {
        self.peeked.take().or_else(|| self.lexer.next())
    }

    /// Body of a bracket whose "(" sat at (line, column). Returns the label
    /// (None when the bracket starts with another bracket) and children.
    fn bracket(&mut self, line: usize, column: usize) -> Result<(Option<String>, Vec<PtbTree>), PtbError> {
        let mut label = None;
        match self.next() {
            Some((Tok::Atom(a), ..)) => label = Some(a),
            Some((Tok::Close, l, c)) => return Err(syntax(l, c, "empty brackets")),
            Some(other) => self.peeked = Some(other),
            None => return Err(syntax(line, column, "unbalanced parenthesis: input ends inside this bracket")),
        }
        let mut children = Vec::new();
        loop {
            match self.next() {
                Some((Tok::Open, l, c)) => {
                    let (lab, kids) = self.bracket(l, c)?;
                    let lab = lab.ok_or_else(|| syntax(l, c, "bracket without a label"))?;
                    children.push(PtbTree::Internal { label: lab, children: kids });
                }
                Some((Tok::Atom(a), ..)) => children.push(PtbTree::Leaf(a)),
                Some((Tok::Close, l, c)) => {
                    if children.is_empty() {
                        return Err(syntax(l, c, "constituent without children"));
                    }
                    return Ok((label, children));
                }
                None => return Err(syntax(line, column, "unbalanced parenthesis: input ends inside this bracket")),
            }
        }
    }
}

/// Every tree in `text`. An unlabeled outer bracket around a single tree,
/// as in `((S ...))`, is removed.
pub fn parse_ptb_all(text: &str) -> Result<Vec<PtbTree>, PtbError> {
    parse_from_line(text, 1)
}

fn parse_from_line(text: &str, first_line: usize) -> Result<Vec<PtbTree>, PtbError> {
    let mut parser = Parser {
        lexer: Lexer::new(text, first_line),
        peeked: None,
    };
    let mut out = Vec::new();
    while let Some((tok, line, column)) = parser.next() {
        match tok {
            Tok::Open => {
                let (label, mut children) = parser.bracket(line, column)?;
                let tree = match label {
                    Some(label) => PtbTree::Internal { label, children },
                    None if children.len() == 1 && !children[0].is_leaf() => children.remove(0),
                    None => return Err(syntax(line, column, "bracket without a label")),
                };
                out.push(tree);
            }
            Tok::Close => return Err(syntax(line, column, "unbalanced parenthesis: unexpected `)`")),
            Tok::Atom(a) => return Err(syntax(line, column, format!("`{a}` outside brackets"))),
        }
    }
    Ok(out)
}

/// Exactly one tree.
pub fn parse_ptb(text: &str) -> Result<PtbTree, PtbError> {
    let mut trees = parse_ptb_all(text)?;
    match trees.len() {
        1 => Ok(trees.remove(0)),
        0 => Err(syntax(1, 1, "no tree in input")),
        n => Err(syntax(1, 1, format!("expected one tree, found {n}"))),
    }
}

/// Streams trees from a reader. A tree ends at the end of a line where the
/// bracket depth returns to zero, so trees may be separated by blank lines or
/// simply follow each other.
pub struct PtbReader<R> {
    input: R,
    line: usize,
    queue: VecDeque<PtbTree>,
    done: bool,
}

impl<R: BufRead> PtbReader<R> {
    pub fn new(input: R) -> Self {
        PtbReader {
            input,
            line: 0,
            queue: VecDeque::new(),
            done: false,
        }
    }

    fn fill(&mut self) -> Result<(), PtbError> {
        let mut buf = String::new();
        let mut first = self.line + 1;
        let mut depth: i64 = 0;
        loop {
            let mut line = String::new();
            let n = self.input.read_line(&mut line).map_err(|e| PtbError::Io(e.to_string()))?;
            if n == 0 {
                self.done = true;
                break;
            }
            self.line += 1;
            if buf.trim().is_empty() {
                buf.clear();
                first = self.line;
            }
            for c in line.chars() {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    _ => {}
                }
            }
            buf.push_str(&line);
            if depth <= 0 && !buf.trim().is_empty() {
                break;
            }
        }
        if !buf.trim().is_empty() {
            self.queue.extend(parse_from_line(&buf, first)?);
        }
        Ok(())
    }
}

impl<R: BufRead> Iterator for PtbReader<R> {
    type Item = Result<PtbTree, PtbError>;

    fn next(&mut self) -> Option<Self::Item> {
        while self.queue.is_empty() && !self.done {
            if let Err(e) = self.fill() {
                self.done = true;
                return Some(Err(e));
            }
        }
        self.queue.pop_front().map(Ok)
    }
}
