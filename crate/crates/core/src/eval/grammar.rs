use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::par::Execution;
use crate::pivot::{daughters, AnnotationDoc, Daughter};

/// Placeholder for a token daughter.
pub const TERMINAL: &str = "tok";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub parent: String,
    pub children: Vec<String>,
}

impl Rule {
    pub fn new<S: AsRef<str>>(parent: &str, children: &[S]) -> Self {
        Rule {
            parent: parent.to_string(),
            children: children.iter().map(|c| c.as_ref().to_string()).collect(),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.parent)?;
        if self.children.is_empty() {
            return f.write_str(" <empty>");
        }
        for c in &self.children {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

/// Rule occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Grammar {
    pub rules: BTreeMap<Rule, usize>,
}

impl Grammar {
    pub fn add(&mut self, rule: Rule) {
        *self.rules.entry(rule).or_default() += 1;
    }

    pub fn merge(&mut self, other: Grammar) {
        for (rule, n) in other.rules {
            *self.rules.entry(rule).or_default() += n;
        }
    }

    pub fn total(&self) -> usize {
        self.rules.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.rules.len()
    }

    pub fn singletons(&self) -> usize {
        self.rules.values().filter(|&&n| n == 1).count()
    }

    /// Share of distinct rules seen exactly once; 0 for an empty grammar.
    pub fn singleton_fraction(&self) -> f64 {
        if self.rules.is_empty() {
            0.0
        } else {
            self.singletons() as f64 / self.distinct() as f64
        }
    }

    pub fn count(&self, rule: &Rule) -> usize {
        self.rules.get(rule).copied().unwrap_or(0)
    }

    /// Descending count, then rule text.
    pub fn sorted(&self) -> Vec<(&Rule, usize)> {
        let mut rows: Vec<_> = self.rules.iter().map(|(r, &n)| (r, n)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.to_string().cmp(&b.0.to_string())));
        rows
    }

    /// `count<TAB>rule` lines, then a summary footer.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (rule, n) in self.sorted() {
            let _ = writeln!(out, "{n}\t{rule}");
        }
        let _ = writeln!(
            out,
            "# {} rules, {} occurrences, {} singletons ({:.4})",
            self.distinct(),
            self.total(),
            self.singletons(),
            self.singleton_fraction()
        );
        out
    }
}

/// One rule per node of the default reading, in preorder. A ref node stands
/// for its referent as a single unit: `CAT -> tok`.
pub fn rules_of(doc: &AnnotationDoc) -> Vec<Rule> {
    let index = doc.index();
    let label = |n| index.category(n).unwrap_or("_").to_string();
    doc.root
        .preorder()
        .into_iter()
        .map(|node| {
            let children = if node.reference.is_some() {
                vec![TERMINAL.to_string()]
            } else {
                daughters(&index, node)
                    .into_iter()
                    .map(|d| match d {
                        Daughter::Token(_) => TERMINAL.to_string(),
                        Daughter::Node(n) => label(n),
                    })
                    .collect()
            };
            Rule {
                parent: label(node),
                children,
            }
        })
        .collect()
}

pub fn extract_grammar(docs: &[AnnotationDoc]) -> Grammar {
    extract_grammar_with(docs, Execution::default())
}

pub fn extract_grammar_with(docs: &[AnnotationDoc], exec: Execution) -> Grammar {
    let partial = exec.map(docs, |d| {
        let mut g = Grammar::default();
        rules_of(d).into_iter().for_each(|r| g.add(r));
        g
    });
    let mut total = Grammar::default();
    partial.into_iter().for_each(|g| total.merge(g));
    total
}
