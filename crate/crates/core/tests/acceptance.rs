//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand_chacha::ChaCha8Rng;
use synpivot::aml::{read_aml_standoff, write_aml, SerializationProfile};
use synpivot::dep::{dep_to_pivot, parse_dep, parse_token_sidecar};
use synpivot::eval::{dep_agreement, extract_grammar, Rule, TERMINAL};
use synpivot::pivot::{structurally_eq, tokens_from_words, AnnotationDoc, Node, NodeItem, Seg};
use synpivot::ptb::{parse_ptb, ptb_to_pivot, EncodingStyle, PtbTree, SentenceText};
use synpivot::registry::{Dialect, Registry};
use synpivot::transduce::{to_dependency, DepOptions, HeadRules};

use common::checks::{self, Check};
use common::WORDS;

const JONES: &str = include_str!("golden/jones.ptb");
const JONES_TEXT: &str = include_str!("golden/jones.txt");
const JONES_AML: &str = include_str!("golden/jones.xml");
const PAUL_FACTS: &str = include_str!("golden/paul.dep");
const PAUL_TOKENS: &str = include_str!("golden/paul.tok");
const PAUL_FACTS_AML: &str = include_str!("golden/paul_facts.xml");
const PAUL_TREE: &str = include_str!("golden/paul.ptb");
const PAUL_TREE_AML: &str = include_str!("golden/paul_tree.xml");

const ROUND_TRIP_CASES: u64 = 1000;
const ORACLE_CASES: u64 = 2000;
const HIERARCHIES: u64 = 100;
const GRAMMAR_SENTENCES: usize = 1000;

type Criterion = (&'static str, fn() -> Result<String, String>);
type Named = (&'static str, fn(u64) -> Check);

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn spans(doc: &AnnotationDoc) -> Vec<(usize, usize)> {
    doc.root
        .preorder()
        .into_iter()
        .flat_map(|n| n.items())
        .filter_map(|i| match i {
            NodeItem::Seg(Seg::Span(s)) => Some((s.start, s.len)),
            _ => None,
        })
        .collect()
}

fn span_of(node: &Node) -> Option<(usize, usize)> {
    node.items().into_iter().find_map(|i| match i {
        NodeItem::Seg(Seg::Span(s)) => Some((s.start, s.len)),
        _ => None,
    })
}

fn tree_anchoring() -> Result<String, String> {
    let tree = parse_ptb(JONES).map_err(err)?;
    let text = SentenceText::new(JONES_TEXT.trim());
    let doc = ptb_to_pivot(&tree, &HeadRules::shipped(), Some(&text), EncodingStyle::default())
        .map_err(err)?
        .with_base("http://www.loria.fr/doc.xml#");
    let p = SerializationProfile::virtual_aml();
    let written = write_aml(&doc, &p).map_err(err)?;
    let ours = read_aml_standoff(&written, &p, &doc.tokens).map_err(err)?;
    let reference = read_aml_standoff(JONES_AML, &p, &doc.tokens).map_err(err)?;
    if !structurally_eq(&ours, &reference) {
        return Err(format!("written markup differs from the reference:\n{written}"));
    }
    let found = spans(&ours);
    for want in [(1, 5), (7, 8), (16, 3), (20, 4), (25, 14)] {
        if !found.contains(&want) {
            return Err(format!("no span {want:?} in {found:?}"));
        }
    }
    let index = ours.index();
    let trace = ours
        .root
        .preorder()
        .into_iter()
        .find(|n| n.reference.is_some())
        .ok_or("no trace node")?;
    let target = index.referent(trace).map_err(err)?;
    let is_subject = span_of(target) == Some((1, 5)) && target.rels().iter().any(|r| r.label == "SBJ");
    if !is_subject {
        return Err(format!("trace points at {:?}", target.id));
    }
    Ok(format!("{} spans, trace -> {}", found.len(), target.id_str()))
}

fn paul() -> Result<Vec<synpivot::pivot::Token>, String> {
    parse_token_sidecar(PAUL_TOKENS).map_err(err)?.into_iter().next().ok_or_else(|| "empty token file".into())
}

fn facts_markup() -> Result<String, String> {
    let doc = dep_to_pivot(&parse_dep(PAUL_FACTS).map_err(err)?, &paul()?).map_err(err)?;
    let rels: Vec<(&str, Option<&str>, Option<&str>)> = doc
        .all_rels()
        .into_iter()
        .map(|r| (r.head.as_str(), r.dependent.as_deref(), r.introducer.as_deref()))
        .collect();
    let want = vec![
        ("w2", Some("w1"), None),
        ("w2", Some("w4"), Some("w3")),
        ("w4", Some("w1"), None),
        ("w4", Some("w5"), None),
    ];
    if rels != want {
        return Err(format!("rels {rels:?}"));
    }
    let out = write_aml(&doc, &SerializationProfile::virtual_aml()).map_err(err)?;
    if out != PAUL_FACTS_AML {
        return Err(format!("markup differs:\n{out}"));
    }
    Ok("4 rels, byte-identical".into())
}

fn transduction() -> Result<String, String> {
    let rules = HeadRules::shipped();
    let mut tree = ptb_to_pivot(&parse_ptb(PAUL_TREE).map_err(err)?, &rules, None, EncodingStyle::explicit_only())
        .map_err(err)?;
    tree.tokens = paul()?;
    let reference = read_aml_standoff(PAUL_TREE_AML, &SerializationProfile::virtual_aml(), &tree.tokens).map_err(err)?;
    if !structurally_eq(&tree, &reference) {
        return Err("tree pivot differs from the reference".into());
    }
    let ptb = Dialect::shipped_ptb();
    let dep = to_dependency(&tree, &rules, &ptb, DepOptions::default()).map_err(err)?;
    let facts = dep_to_pivot(&parse_dep(PAUL_FACTS).map_err(err)?, &paul()?).map_err(err)?;
    let rep = dep_agreement(&facts, &dep, &Registry::shipped(), &Dialect::shipped_dep(), &ptb, 0).map_err(err)?;
    let (p, r) = (rep.labeled.precision(), rep.labeled.recall());
    if p != 1.0 || r != 1.0 {
        return Err(format!("labeled P={p} R={r}, unmatched gold {:?} test {:?}", rep.labeled.unmatched_gold, rep.labeled.unmatched_test));
    }
    Ok(format!("labeled P=R=1 over {} rels", rep.labeled.matched))
}

fn seeds(cases: u64, checks: &[Named]) -> Result<String, String> {
    for (name, check) in checks {
        for seed in 0..cases {
            check(seed).map_err(|e| format!("{name}, seed {seed}: {e}"))?;
        }
    }
    Ok(format!("{} x {cases} cases", checks.len()))
}

/// Rules are listed so that each category's first one ends the recursion
/// soonest.
const GRAMMAR: &[(&str, &[&str])] = &[
    ("S", &["VP"]),
    ("S", &["NP", "VP"]),
    ("S", &["NP", "VP", "PP"]),
    ("S", &["ADVP", "NP", "VP"]),
    ("NP", &["tok"]),
    ("NP", &["tok", "tok"]),
    ("NP", &["NP", "PP"]),
    ("NP", &["tok", "ADJP", "tok"]),
    ("VP", &["tok"]),
    ("VP", &["tok", "NP"]),
    ("VP", &["tok", "NP", "PP"]),
    ("VP", &["tok", "S"]),
    ("VP", &["tok", "SBAR"]),
    ("VP", &["ADVP", "tok", "NP"]),
    ("PP", &["tok", "NP"]),
    ("ADJP", &["tok"]),
    ("ADJP", &["ADVP", "tok"]),
    ("ADVP", &["tok"]),
    ("SBAR", &["tok", "S"]),
    ("SBAR", &["S"]),
];

fn generate(rng: &mut ChaCha8Rng, cat: &str, depth: usize) -> PtbTree {
    let options: Vec<&[&str]> = GRAMMAR.iter().filter(|(c, _)| *c == cat).map(|(_, rhs)| *rhs).collect();
    let rhs = if depth >= 6 { options[0] } else { options.choose(rng).unwrap() };
    let kids = rhs
        .iter()
        .map(|&sym| {
            if sym == TERMINAL {
                PtbTree::leaf(*WORDS.choose(rng).unwrap())
            } else {
                generate(rng, sym, depth + 1)
            }
        })
        .collect();
    PtbTree::node(cat, kids)
}

fn grammar_recovery() -> Result<String, String> {
    let started = Instant::now();
    for seed in 0..HIERARCHIES {
        checks::one_rule_per_node(seed)?;
    }
    let mut r = common::rng(7);
    let rules = HeadRules::shipped();
    let docs = (0..GRAMMAR_SENTENCES)
        .map(|_| {
            let tree = generate(&mut r, "S", 0);
            let mut doc = ptb_to_pivot(&tree, &rules, None, EncodingStyle::explicit_only()).map_err(err)?;
            let words: Vec<String> = doc.tokens.iter().map(|t| t.text.clone()).collect();
            doc.tokens = tokens_from_words(&words);
            Ok(doc)
        })
        .collect::<Result<Vec<_>, String>>()?;
    let nodes: usize = docs.iter().map(|d| d.root.preorder().len()).sum();
    let grammar = extract_grammar(&docs);
    if grammar.total() != nodes {
        return Err(format!("{} occurrences for {nodes} nodes", grammar.total()));
    }
    let found: BTreeSet<&Rule> = grammar.rules.keys().collect();
    let want: BTreeSet<Rule> = GRAMMAR.iter().map(|(c, rhs)| Rule::new(c, rhs)).collect();
    if found != want.iter().collect() {
        let extra: Vec<_> = found.iter().filter(|r| !want.contains(r)).map(|r| r.to_string()).collect();
        let missing: Vec<_> = want.iter().filter(|r| !found.contains(r)).map(|r| r.to_string()).collect();
        return Err(format!("extra {extra:?}, missing {missing:?}"));
    }
    let took = started.elapsed();
    if took > Duration::from_secs(10) {
        return Err(format!("took {took:.2?}"));
    }
    Ok(format!("{} rules from {GRAMMAR_SENTENCES} sentences in {took:.2?}", want.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("tree conversion with character anchors", tree_anchoring),
        ("dependency facts as markup", facts_markup),
        ("tree to dependency agreement", transduction),
        ("round trips", || {
            seeds(
                ROUND_TRIP_CASES,
                &[
                    ("ptb", checks::tree_round_trip),
                    ("dep", checks::facts_round_trip),
                    ("virtual", checks::virtual_round_trip),
                    ("concrete", checks::concrete_round_trip),
                ],
            )
        }),
        ("bracket scoring oracle", || {
            seeds(ORACLE_CASES, &[("oracle", checks::parseval_matches_oracle), ("spurious", checks::spurious_bracket)])
        }),
        ("registry laws", || {
            seeds(
                HIERARCHIES,
                &[
                    ("order", checks::subsumption_order),
                    ("equivalence", checks::equivalence_relation),
                    ("monotone", checks::coarsening_is_monotone),
                ],
            )
        }),
        ("grammar extraction", grammar_recovery),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = started.elapsed();
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail} ({took:.2?})", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {} {name}: {e}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
