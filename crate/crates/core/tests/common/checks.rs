//! One seeded case of each law, shared by the proptests and the acceptance
//! harness. `Err` carries a description of the counterexample.

use std::collections::BTreeSet;

use rand::Rng;
use synpivot::aml::{read_aml, read_aml_standoff, write_aml, write_document, SerializationProfile};
use synpivot::dep::{dep_to_pivot, parse_dep, pivot_to_dep, render_dep};
use synpivot::eval::{brackets_of, dep_agreement, extract_grammar_with, parseval, Bracket, BracketSet};
use synpivot::par::Execution;
use synpivot::pivot::{structurally_eq, validate_doc, AnnotationDoc};
use synpivot::ptb::{parse_ptb, pivot_to_ptb, ptb_to_pivot, EncodingStyle, SentenceText};
use synpivot::registry::{equivalent, Dialect, Registry};
use synpivot::transduce::HeadRules;

use super::*;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($fmt)+)),
        }
    };
}

pub type Check = Result<(), String>;

fn style(seed: u64) -> EncodingStyle {
    if seed.is_multiple_of(2) {
        EncodingStyle::default()
    } else {
        EncodingStyle::explicit_only()
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn tree_round_trip(seed: u64) -> Check {
    let mut r = rng(seed);
    let tree = random_tree(&mut r, 8, true);
    let rules = HeadRules::shipped();
    let style = style(seed);
    let text = sentence_of(&tree);
    let sentence = SentenceText::new(&text);
    let spans = r.random_bool(0.5).then_some(&sentence);
    let doc = ptb_to_pivot(&tree, &rules, spans, style).map_err(err)?;
    ensure!(validate_doc(&doc).is_empty(), "invalid pivot {:?}", validate_doc(&doc));
    let back = pivot_to_ptb(&doc, &rules, style).map_err(err)?;
    ensure!(back == tree.renumber_coindices(), "{} came back as {}", tree.render(), back.render());
    let again = ptb_to_pivot(&back, &rules, spans, style).map_err(err)?;
    ensure!(structurally_eq(&doc, &again), "second conversion of {} differs", tree.render());
    ensure!(parse_ptb(&tree.render()).map_err(err)? == tree, "reparse of {}", tree.render());
    Ok(())
}

pub fn facts_round_trip(seed: u64) -> Check {
    let mut r = rng(seed);
    let doc = random_dep_doc(&mut r, &dep_relations());
    let dep = Dialect::shipped_dep();
    let facts = pivot_to_dep(&doc, &dep, &dep).map_err(err)?;
    let text = render_dep(&facts);
    ensure!(parse_dep(&text).map_err(err)? == facts, "reparse of\n{text}");
    ensure!(dep_to_pivot(&facts, &doc.tokens).map_err(err)? == doc, "pivot of\n{text}");
    Ok(())
}

fn any_doc(r: &mut ChaCha8Rng, seed: u64) -> AnnotationDoc {
    if r.random_bool(0.3) {
        random_dep_doc(r, &dep_relations())
    } else {
        let tree = random_tree(r, 8, true);
        let text = sentence_of(&tree);
        let spans = r.random_bool(0.5).then(|| SentenceText::new(&text));
        ptb_to_pivot(&tree, &HeadRules::shipped(), spans.as_ref(), style(seed)).unwrap()
    }
}

pub fn virtual_round_trip(seed: u64) -> Check {
    let mut r = rng(seed);
    let mut doc = any_doc(&mut r, seed);
    decorate(&mut r, &mut doc, "note");
    let p = SerializationProfile::virtual_aml();
    let xml = write_document(&doc, &p).map_err(err)?;
    ensure!(read_aml(&xml, &p).map_err(err)? == doc, "document\n{xml}");
    let bare = write_aml(&doc, &p).map_err(err)?;
    ensure!(read_aml_standoff(&bare, &p, &doc.tokens).map_err(err)? == doc, "stand-off\n{bare}");
    Ok(())
}

pub fn concrete_round_trip(seed: u64) -> Check {
    let mut r = rng(seed);
    let reg = Registry::shipped();
    let tree = random_tree(&mut r, 8, true);
    let mut doc = ptb_to_pivot(&tree, &HeadRules::shipped(), None, style(seed)).map_err(err)?;
    decorate(&mut r, &mut doc, "NULL");
    let dialect = random_dialect(&mut r);
    let p = SerializationProfile::concrete(Dialect::shipped_ptb(), dialect, &reg);
    let xml = write_document(&doc, &p).map_err(err)?;
    ensure!(read_aml(&xml, &p).map_err(err)? == doc, "concrete\n{xml}");
    Ok(())
}

fn tree_brackets(r: &mut ChaCha8Rng, words: Option<usize>) -> Option<BracketSet> {
    let max = words.unwrap_or(6);
    for _ in 0..100 {
        let tree = random_tree(r, max, true);
        let doc = ptb_to_pivot(&tree, &HeadRules::shipped(), None, EncodingStyle::default()).ok()?;
        if words.is_none_or(|n| doc.tokens.len() == n) {
            return brackets_of(&doc, &Dialect::shipped_ptb()).ok();
        }
    }
    None
}

/// Gold and test from random trees over the same number of tokens, or from
/// random span sets.
fn bracket_pair(r: &mut ChaCha8Rng) -> (BracketSet, BracketSet) {
    if r.random_bool(0.7) {
        if let Some(gold) = tree_brackets(r, None) {
            if let Some(test) = tree_brackets(r, Some(gold.len)) {
                return (gold, test);
            }
        }
    }
    let len = r.random_range(1..=6);
    (random_brackets(r, len), random_brackets(r, len))
}

pub fn parseval_matches_oracle(seed: u64) -> Check {
    let mut r = rng(seed);
    let (gold, test) = bracket_pair(&mut r);
    for labeled in [true, false] {
        let rep = parseval(&gold, &test, labeled).map_err(err)?;
        let want = oracle_matched(&gold, &test, labeled);
        ensure!(rep.matched == want, "matched {} != {want} for {:?} vs {:?}", rep.matched, gold.spans(), test.spans());
        let crossing = oracle_crossing(&gold, &test);
        ensure!(rep.crossing == crossing, "crossing {} != {crossing}", rep.crossing);
        let back = parseval(&test, &gold, labeled).map_err(err)?;
        ensure!(back.matched == rep.matched, "asymmetric match count");
        ensure!((back.precision() - rep.recall()).abs() < 1e-12, "precision and recall do not swap");
    }
    let own = parseval(&gold, &gold, true).map_err(err)?;
    ensure!(own.matched == gold.brackets.len(), "self match");
    ensure!(own.crossing == oracle_crossing(&gold, &gold), "self crossing");
    if !gold.brackets.is_empty() {
        ensure!(own.precision() == 1.0 && own.recall() == 1.0 && own.f1() == 1.0, "self score below 1");
    }
    Ok(())
}

/// A bracket over an existing test span under a label gold never uses.
pub fn spurious_bracket(seed: u64) -> Check {
    let mut r = rng(seed);
    let (gold, test) = bracket_pair(&mut r);
    let before = parseval(&gold, &test, true).map_err(err)?;
    let (start, end) = match test.brackets.choose(&mut r) {
        Some(b) => (b.start, b.end),
        None => (1, test.len),
    };
    let mut extra = test.brackets.clone();
    extra.push(Bracket::new(start, end, "UNARY"));
    let after = parseval(&gold, &BracketSet::new(test.len, extra), true).map_err(err)?;
    ensure!(after.matched == before.matched, "match count changed");
    ensure!(after.recall() == before.recall(), "recall changed");
    if before.matched > 0 {
        ensure!(after.precision() < before.precision(), "precision did not drop");
    }
    Ok(())
}

fn hierarchy(seed: u64) -> (Registry, Vec<String>) {
    let mut r = rng(seed);
    let n = r.random_range(1..=12);
    (random_registry(&mut r, n), (0..n).map(|i| format!("c{i}")).collect())
}

pub fn subsumption_order(seed: u64) -> Check {
    let (reg, ids) = hierarchy(seed);
    let sub = |a: &str, b: &str| reg.subsumes(a, b).unwrap();
    for a in &ids {
        ensure!(sub(a, a), "{a} does not subsume itself");
        for b in &ids {
            ensure!(!(sub(a, b) && sub(b, a)) || a == b, "{a} and {b} subsume each other");
            for c in &ids {
                ensure!(!(sub(a, b) && sub(b, c)) || sub(a, c), "{a} > {b} > {c} but not {a} > {c}");
            }
        }
    }
    Ok(())
}

pub fn equivalence_relation(seed: u64) -> Check {
    let (reg, ids) = hierarchy(seed);
    let d = identity_dialect(&reg);
    for g in 0..=reg.max_depth() + 1 {
        let eq = |a: &str, b: &str| equivalent(&d, a, &d, b, &reg, g).unwrap();
        for a in &ids {
            ensure!(eq(a, a), "{a} not equivalent to itself at {g}");
            for b in &ids {
                ensure!(eq(a, b) == eq(b, a), "{a} ~ {b} asymmetric at {g}");
                for c in &ids {
                    ensure!(!(eq(a, b) && eq(b, c)) || eq(a, c), "{a} ~ {b} ~ {c} not transitive at {g}");
                }
            }
        }
    }
    Ok(())
}

/// Full depth, then the deepest truncation, up to the roots.
pub fn coarsening_is_monotone(seed: u64) -> Check {
    let (reg, ids) = hierarchy(seed);
    let mut r = rng(seed ^ 0x5eed);
    let d = identity_dialect(&reg);
    let gold = random_dep_doc(&mut r, &ids);
    let test = random_rels_over(&mut r, gold.tokens.clone(), &ids);
    let mut last = 0;
    for g in std::iter::once(0).chain((1..=reg.max_depth()).rev()) {
        let rep = dep_agreement(&gold, &test, &reg, &d, &d, g).map_err(err)?;
        ensure!(rep.labeled.matched >= last, "matches fell to {} at granularity {g}", rep.labeled.matched);
        ensure!(rep.labeled.matched <= rep.unlabeled.matched, "labeled above unlabeled");
        last = rep.labeled.matched;
    }
    Ok(())
}

pub fn one_rule_per_node(seed: u64) -> Check {
    let mut r = rng(seed);
    let rules = HeadRules::shipped();
    let n = r.random_range(0..20);
    let mut docs = Vec::new();
    for _ in 0..n {
        let traces = r.random_bool(0.5);
        let tree = random_tree(&mut r, 10, traces);
        docs.push(ptb_to_pivot(&tree, &rules, None, style(seed)).map_err(err)?);
    }
    let nodes: usize = docs.iter().map(|d| d.root.preorder().len()).sum();
    let seq = extract_grammar_with(&docs, Execution::Sequential);
    ensure!(seq.total() == nodes, "{} occurrences for {nodes} nodes", seq.total());
    ensure!(seq == extract_grammar_with(&docs, Execution::Parallel), "parallel extraction differs");
    let distinct: BTreeSet<_> = docs.iter().flat_map(synpivot::eval::rules_of).collect();
    ensure!(distinct.len() == seq.distinct(), "distinct count");
    Ok(())
}
