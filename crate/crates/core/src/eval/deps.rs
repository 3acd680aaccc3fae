use std::collections::{BTreeMap, HashMap};

use super::{EvalError, EvalReport, LabelCounts, Readings};
use crate::pivot::{AnnotationDoc, Rel};
use crate::registry::{Dialect, Registry};

/// Labeled and unlabeled agreement from one pass.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DepReport {
    pub labeled: EvalReport,
    pub unlabeled: EvalReport,
}

struct Edge {
    head: usize,
    dependent: Option<usize>,
    label: String,
    describe: String,
}

fn edges(doc: &AnnotationDoc, dialect: &Dialect, registry: &Registry, granularity: usize) -> Result<Vec<Edge>, EvalError> {
    let position = |r: &Rel, id: &str| {
        doc.token_position(id).ok_or_else(|| EvalError::NotDependency {
            label: r.label.clone(),
            id: id.to_string(),
        })
    };
    doc.all_rels()
        .into_iter()
        .map(|r| {
            let id = dialect.normalize(&r.label)?;
            Ok(Edge {
                head: position(r, &r.head)?,
                dependent: r.dependent.as_deref().map(|d| position(r, d)).transpose()?,
                label: registry.truncate(id, granularity)?.to_string(),
                describe: format!("{}({},{})", r.label, r.head, r.dependent.as_deref().unwrap_or("_")),
            })
        })
        .collect()
}

fn score(gold: &[Edge], test: &[Edge], labeled: bool) -> EvalReport {
    let key = |e: &Edge| (e.head, e.dependent, if labeled { e.label.clone() } else { String::new() });
    let mut report = EvalReport {
        gold: gold.len(),
        test: test.len(),
        sentences: 1,
        ..EvalReport::default()
    };
    let mut available: HashMap<_, usize> = HashMap::new();
    for e in gold {
        *available.entry(key(e)).or_default() += 1;
    }
    for e in test {
        match available.get_mut(&key(e)) {
            Some(n) if *n > 0 => {
                *n -= 1;
                report.matched += 1;
            }
            _ => report.unmatched_test.push(e.describe.clone()),
        }
    }
    let mut wanted: HashMap<_, usize> = HashMap::new();
    for e in test {
        *wanted.entry(key(e)).or_default() += 1;
    }
    for e in gold {
        match wanted.get_mut(&key(e)) {
            Some(n) if *n > 0 => *n -= 1,
            _ => report.unmatched_gold.push(e.describe.clone()),
        }
    }
    if report.matched == report.gold && report.matched == report.test {
        report.exact = 1;
    }
    let mut counts: HashMap<(usize, Option<usize>, &str), (usize, usize)> = HashMap::new();
    for e in gold {
        counts.entry((e.head, e.dependent, &e.label)).or_default().0 += 1;
    }
    for e in test {
        counts.entry((e.head, e.dependent, &e.label)).or_default().1 += 1;
    }
    let mut per_label: BTreeMap<String, LabelCounts> = BTreeMap::new();
    for ((_, _, label), (g, t)) in counts {
        let c = per_label.entry(label.to_string()).or_default();
        c.gold += g;
        c.test += t;
        c.matched += g.min(t);
    }
    report.per_label = per_label;
    report
}

/// Agreement of two flat dependency pivots over the same tokens. A test rel
/// matches an unconsumed gold rel with the same head and dependent whose
/// label is equivalent at `granularity` (0: full depth).
pub fn dep_agreement(
    gold: &AnnotationDoc,
    test: &AnnotationDoc,
    registry: &Registry,
    gold_dialect: &Dialect,
    test_dialect: &Dialect,
    granularity: usize,
) -> Result<DepReport, EvalError> {
    if gold.tokens.len() != test.tokens.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.tokens.len(),
            test: test.tokens.len(),
        });
    }
    if let Some((i, (g, t))) = gold
        .tokens
        .iter()
        .zip(&test.tokens)
        .enumerate()
        .find(|(_, (g, t))| g.text != t.text)
    {
        return Err(EvalError::TokenMismatch {
            position: i + 1,
            gold: g.text.clone(),
            test: t.text.clone(),
        });
    }
    let g = edges(gold, gold_dialect, registry, granularity)?;
    let t = edges(test, test_dialect, registry, granularity)?;
    Ok(DepReport {
        labeled: score(&g, &t, true),
        unlabeled: score(&g, &t, false),
    })
}

/// Agreement of each test reading against the gold default reading; the
/// best reading is chosen by labeled f1.
pub fn dep_agreement_readings(
    gold: &AnnotationDoc,
    test: &AnnotationDoc,
    registry: &Registry,
    gold_dialect: &Dialect,
    test_dialect: &Dialect,
    granularity: usize,
) -> Result<Readings<DepReport>, EvalError> {
    let g = gold.reading(0);
    let scores = (0..test.reading_count())
        .map(|k| dep_agreement(&g, &test.reading(k), registry, gold_dialect, test_dialect, granularity))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Readings::pick(scores, |r| r.labeled.f1()))
}
