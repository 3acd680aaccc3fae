//! Comparison over the pivot: PARSEVAL brackets, dependency agreement with
//! registry-mediated label equivalence, and treebank grammar extraction.

mod brackets;
mod deps;
mod grammar;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::par::Execution;
use crate::pivot::AnnotationDoc;
use crate::registry::RegistryError;

pub use brackets::{brackets_of, brackets_of_with, parseval, parseval_readings, Bracket, BracketOptions, BracketSet};
pub use deps::{dep_agreement, dep_agreement_readings, DepReport};
pub use grammar::{extract_grammar, extract_grammar_with, rules_of, Grammar, Rule, TERMINAL};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("sentence lengths differ: gold has {gold} tokens, test has {test}")]
    LengthMismatch { gold: usize, test: usize },
    #[error("token {position} differs: gold `{gold}`, test `{test}`")]
    TokenMismatch { position: usize, gold: String, test: String },
    #[error("corpora differ in size: gold has {gold} sentences, test has {test}")]
    CountMismatch { gold: usize, test: usize },
    #[error("node `{0}` has an anchor that resolves to no token")]
    NoTokenAnchor(String),
    #[error("rel `{label}`: endpoint `{id}` is not a token; convert to dependencies first")]
    NotDependency { label: String, id: String },
    #[error("sentence {sentence}: {source}")]
    Sentence { sentence: usize, source: Box<EvalError> },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// Match, gold and test counts for one label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelCounts {
    pub matched: usize,
    pub gold: usize,
    pub test: usize,
}

/// Counts behind precision and recall. Ratios are computed from the
/// integer counts, so corpus reports sum before dividing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvalReport {
    pub matched: usize,
    pub gold: usize,
    pub test: usize,
    /// Test brackets overlapping a gold bracket without nesting.
    pub crossing: usize,
    pub sentences: usize,
    /// Sentences whose test and gold sets coincide.
    pub exact: usize,
    pub per_label: BTreeMap<String, LabelCounts>,
    /// Ids of unmatched elements, for following links back into the
    /// documents. Corpus reports prefix them with `sentence:`.
    pub unmatched_gold: Vec<String>,
    pub unmatched_test: Vec<String>,
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        n as f64 / d as f64
    }
}

impl EvalReport {
    /// matched / test; 1 when the test side is empty.
    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.test)
    }

    /// matched / gold; 1 when the gold side is empty.
    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.gold)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn exact_match(&self) -> bool {
        self.exact == self.sentences
    }

    /// Adds another report's counts. Unmatched ids are appended under
    /// `prefix`.
    pub fn absorb(&mut self, other: &EvalReport, prefix: &str) {
        self.matched += other.matched;
        self.gold += other.gold;
        self.test += other.test;
        self.crossing += other.crossing;
        self.sentences += other.sentences;
        self.exact += other.exact;
        for (label, c) in &other.per_label {
            let e = self.per_label.entry(label.clone()).or_default();
            e.matched += c.matched;
            e.gold += c.gold;
            e.test += c.test;
        }
        self.unmatched_gold.extend(other.unmatched_gold.iter().map(|id| format!("{prefix}{id}")));
        self.unmatched_test.extend(other.unmatched_test.iter().map(|id| format!("{prefix}{id}")));
    }

    /// `metric<TAB>value` lines; per-label lines read `label.X<TAB>m/g/t`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sentences\t{}", self.sentences);
        let _ = writeln!(out, "matched\t{}", self.matched);
        let _ = writeln!(out, "gold\t{}", self.gold);
        let _ = writeln!(out, "test\t{}", self.test);
        let _ = writeln!(out, "precision\t{:.6}", self.precision());
        let _ = writeln!(out, "recall\t{:.6}", self.recall());
        let _ = writeln!(out, "f1\t{:.6}", self.f1());
        let _ = writeln!(out, "crossing\t{}", self.crossing);
        let _ = writeln!(out, "exact_match\t{}/{}", self.exact, self.sentences);
        for (label, c) in &self.per_label {
            let _ = writeln!(out, "label.{label}\t{}/{}/{}", c.matched, c.gold, c.test);
        }
        out
    }

    /// Aligned table for people.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sentences    {:>8}", self.sentences);
        let _ = writeln!(out, "precision    {:>8.4}  ({}/{})", self.precision(), self.matched, self.test);
        let _ = writeln!(out, "recall       {:>8.4}  ({}/{})", self.recall(), self.matched, self.gold);
        let _ = writeln!(out, "f1           {:>8.4}", self.f1());
        let _ = writeln!(out, "crossing     {:>8}", self.crossing);
        let _ = writeln!(out, "exact match  {:>8}  ({}/{})", self.exact_match(), self.exact, self.sentences);
        if !self.per_label.is_empty() {
            let width = self.per_label.keys().map(|k| k.chars().count()).max().unwrap_or(5).max(5);
            let _ = writeln!(out);
            let _ = writeln!(out, "{:<width$}  {:>7} {:>7} {:>7}", "label", "match", "gold", "test");
            for (label, c) in &self.per_label {
                let _ = writeln!(out, "{label:<width$}  {:>7} {:>7} {:>7}", c.matched, c.gold, c.test);
            }
        }
        out
    }
}

/// Scores of every test-side reading against the gold default reading.
#[derive(Debug, Clone, PartialEq)]
pub struct Readings<T> {
    /// Index of the best reading: highest f1, earliest on ties.
    pub best: usize,
    pub scores: Vec<T>,
}

impl<T> Readings<T> {
    pub fn best(&self) -> &T {
        &self.scores[self.best]
    }

    pub fn pick(scores: Vec<T>, f1: impl Fn(&T) -> f64) -> Self {
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if f1(s) > f1(&scores[best]) {
                best = i;
            }
        }
        Readings { best, scores }
    }
}

/// Sentence-aligned corpus comparison: `score` runs per pair (in parallel
/// when asked) and counts are summed in input order. The first failing
/// sentence's error is returned.
pub fn aggregate<F>(gold: &[AnnotationDoc], test: &[AnnotationDoc], exec: Execution, score: F) -> Result<EvalReport, EvalError>
where
    F: Fn(&AnnotationDoc, &AnnotationDoc) -> Result<EvalReport, EvalError> + Sync + Send,
{
    if gold.len() != test.len() {
        return Err(EvalError::CountMismatch {
            gold: gold.len(),
            test: test.len(),
        });
    }
    let pairs: Vec<(&AnnotationDoc, &AnnotationDoc)> = gold.iter().zip(test).collect();
    let reports = exec.map(&pairs, |(g, t)| score(g, t));
    let mut total = EvalReport::default();
    for (i, r) in reports.into_iter().enumerate() {
        let r = r.map_err(|e| EvalError::Sentence {
            sentence: i + 1,
            source: Box::new(e),
        })?;
        total.absorb(&r, &format!("{}:", i + 1));
    }
    Ok(total)
}

#[cfg(test)]
mod tests;
