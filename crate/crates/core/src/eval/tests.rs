use super::*;
use crate::dep::{dep_to_pivot, parse_dep};
use crate::pivot::{tokens_from_words, Alt, Node, NodeItem, Rel};
use crate::ptb::{parse_ptb, ptb_to_pivot, EncodingStyle};
use crate::registry::{Dialect, Registry};
use crate::transduce::{to_dependency, DepOptions, HeadRules};

const PAUL_FACTS: &str = include_str!("../../tests/golden/paul.dep");
const PAUL_TREE: &str = include_str!("../../tests/golden/paul.ptb");

fn paul() -> Vec<crate::pivot::Token> {
    tokens_from_words(&["Paul", "intends", "to", "leave", "IBM"])
}

fn paul_tree() -> AnnotationDoc {
    let mut doc = ptb_to_pivot(&parse_ptb(PAUL_TREE).unwrap(), &HeadRules::shipped(), None, EncodingStyle::explicit_only()).unwrap();
    doc.tokens = paul();
    doc
}

fn set(len: usize, spans: &[(usize, usize, &str)]) -> BracketSet {
    BracketSet::new(len, spans.iter().map(|&(s, e, l)| Bracket::new(s, e, l)).collect())
}

#[test]
fn paul_brackets() {
    let b = brackets_of(&paul_tree(), &Dialect::shipped_ptb()).unwrap();
    let mut spans: Vec<_> = b.spans().into_iter().map(|(s, e, l)| (s, e, l.to_string())).collect();
    spans.sort();
    let mut expected = vec![
        (1, 5, "Sentence"),
        (1, 1, "NounPhrase"),
        (2, 2, "VerbPhrase"),
        (3, 5, "Sentence"),
        (3, 5, "VerbPhrase"),
        (4, 5, "VerbPhrase"),
        (5, 5, "NounPhrase"),
    ]
    .into_iter()
    .map(|(s, e, l)| (s, e, l.to_string()))
    .collect::<Vec<_>>();
    expected.sort();
    assert_eq!(spans, expected);
    assert_eq!(b.len, 5);

    let no_root = brackets_of_with(&paul_tree(), &Dialect::shipped_ptb(), BracketOptions { include_root: false, include_single_token: false }).unwrap();
    assert_eq!(no_root.brackets.len(), 3);
}

#[test]
fn trivial_bracket_sets() {
    let ptb = Dialect::shipped_ptb();
    let toks = tokens_from_words(&["x"]);
    let one = AnnotationDoc::new("", toks.clone(), Node::new("s0").with_cat("NP").with_token("w1"));
    assert_eq!(brackets_of(&one, &ptb).unwrap().spans(), vec![(1, 1, "NounPhrase")]);
    let vacuous = AnnotationDoc::new("", toks.clone(), Node::new("s0").with_cat("S").with_child(Node::new("s1").with_cat("NP")).with_token("w1"));
    assert_eq!(brackets_of(&vacuous, &ptb).unwrap().brackets.len(), 1);
    let dangling = AnnotationDoc::new("", toks, Node::new("s0").with_cat("NP").with_token("w9"));
    assert!(matches!(brackets_of(&dangling, &ptb), Err(EvalError::NoTokenAnchor(id)) if id == "s0"));
}

#[test]
fn parseval_examples() {
    let gold = brackets_of(&paul_tree(), &Dialect::shipped_ptb()).unwrap();
    let same = parseval(&gold, &gold, true).unwrap();
    assert_eq!((same.precision(), same.recall(), same.f1(), same.crossing), (1.0, 1.0, 1.0, 0));
    assert!(same.exact_match());

    let mut test = gold.clone();
    test.brackets.retain(|b| !(b.start == 4 && b.end == 5));
    let r = parseval(&gold, &test, true).unwrap();
    assert_eq!((r.matched, r.gold, r.test), (6, 7, 6));
    assert_eq!(r.precision(), 1.0);
    assert_eq!(r.recall(), 6.0 / 7.0);
    assert!(!r.exact_match());
    assert_eq!(r.unmatched_gold, vec!["s6".to_string()]);

    let g = set(5, &[(1, 2, "Y"), (3, 5, "Z")]);
    let t = set(5, &[(2, 3, "X")]);
    assert!(parseval(&g, &t, true).unwrap().crossing >= 1);
    assert!(matches!(parseval(&g, &set(4, &[]), true), Err(EvalError::LengthMismatch { .. })));
}

#[test]
fn labels_matter_only_when_labeled() {
    let g = set(3, &[(1, 3, "S"), (1, 1, "NP"), (1, 1, "NP")]);
    let t = set(3, &[(1, 3, "S"), (1, 1, "VP"), (1, 1, "NP")]);
    assert_eq!(parseval(&g, &t, true).unwrap().matched, 2);
    let u = parseval(&g, &t, false).unwrap();
    assert_eq!(u.matched, 3);
    assert_eq!(u.per_label["NP"], LabelCounts { matched: 1, gold: 2, test: 1 });
}

#[test]
fn extra_correct_unary_bracket_costs_precision_only() {
    let g = set(3, &[(1, 3, "S"), (2, 3, "VP")]);
    let t = set(3, &[(1, 3, "S"), (2, 3, "VP"), (2, 3, "VP")]);
    let base = parseval(&g, &g, true).unwrap();
    let more = parseval(&g, &t, true).unwrap();
    assert!(more.precision() < base.precision());
    assert_eq!(more.recall(), base.recall());
}

#[test]
fn facts_agree_with_transduced_tree() {
    let reg = Registry::shipped();
    let (ptb, dep) = (Dialect::shipped_ptb(), Dialect::shipped_dep());
    let gold = dep_to_pivot(&parse_dep(PAUL_FACTS).unwrap(), &paul()).unwrap();
    let test = to_dependency(&paul_tree(), &HeadRules::shipped(), &ptb, DepOptions::default()).unwrap();
    let r = dep_agreement(&gold, &test, &reg, &dep, &ptb, 0).unwrap();
    assert_eq!((r.labeled.precision(), r.labeled.recall()), (1.0, 1.0));
    assert_eq!(r.labeled.matched, 4);
    let same = dep_agreement(&gold, &gold, &reg, &dep, &dep, 0).unwrap();
    assert_eq!((same.labeled.f1(), same.unlabeled.f1()), (1.0, 1.0));
}

#[test]
fn single_edge_label_flip() {
    let reg = Registry::shipped();
    let dep = Dialect::shipped_dep();
    let toks = tokens_from_words(&["a", "b"]);
    let one = |l: &str| AnnotationDoc::new("", toks.clone(), Node::anonymous().with_rel(Rel::new(l, "w2").with_dependent("w1")));
    let r = dep_agreement(&one("subj"), &one("dobj"), &reg, &dep, &dep, 0).unwrap();
    assert_eq!((r.labeled.matched, r.unlabeled.matched), (0, 1));
    // both are arguments two levels down
    let coarse = dep_agreement(&one("subj"), &one("dobj"), &reg, &dep, &dep, 2).unwrap();
    assert_eq!(coarse.labeled.matched, 1);

    let other = AnnotationDoc::new("", tokens_from_words(&["a", "c"]), Node::anonymous());
    assert!(matches!(dep_agreement(&one("subj"), &other, &reg, &dep, &dep, 0), Err(EvalError::TokenMismatch { position: 2, .. })));
    assert!(matches!(dep_agreement(&paul_tree(), &paul_tree(), &reg, &Dialect::shipped_ptb(), &Dialect::shipped_ptb(), 0), Err(EvalError::NotDependency { .. })));
}

#[test]
fn paul_grammar() {
    let g = extract_grammar(&[paul_tree()]);
    for (parent, children) in [
        ("S", &["NP", "VP", "S"][..]),
        ("VP", &["tok"]),
        ("S", &["NP", "VP"]),
        ("VP", &["tok", "VP"]),
        ("VP", &["tok", "NP"]),
        ("NP", &["tok"]),
    ] {
        assert!(g.count(&Rule::new(parent, children)) >= 1, "{parent} -> {children:?}");
    }
    assert_eq!(g.distinct(), 6);
    assert_eq!(g.total(), paul_tree().root.preorder().len());
    assert_eq!(g.count(&Rule::new("NP", &["tok"])), 3);
    assert!(extract_grammar(&[]).rules.is_empty());

    let twice = extract_grammar_with(&[paul_tree(), paul_tree()], Execution::Sequential);
    assert!(twice.rules.iter().all(|(r, &n)| n == 2 * g.count(r)));
    let table = g.render();
    assert!(table.starts_with("3\tNP -> tok\n"), "{table}");
    assert!(table.ends_with("# 6 rules, 8 occurrences, 5 singletons (0.8333)\n"));
}

#[test]
fn alternatives_pick_the_best_reading() {
    let ptb = Dialect::shipped_ptb();
    let toks = tokens_from_words(&["a", "b"]);
    let gold = AnnotationDoc::new("", toks.clone(), Node::new("s0").with_cat("S").with_child(Node::new("s1").with_cat("NP").with_token("w1")).with_token("w2"));
    let alt = NodeItem::Alt(Alt {
        alternatives: vec![
            vec![NodeItem::Node(Node::new("a1").with_cat("VP").with_token("w1"))],
            vec![NodeItem::Node(Node::new("a2").with_cat("NP").with_token("w1"))],
        ],
    });
    let test = AnnotationDoc::new("", toks, Node::new("s0").with_cat("S").with(alt).with_token("w2"));
    let r = parseval_readings(&gold, &test, &ptb, &ptb, true, BracketOptions::default()).unwrap();
    assert_eq!(r.scores.len(), 2);
    assert_eq!(r.best, 1);
    assert_eq!(r.best().f1(), 1.0);
    assert!(r.scores[0].f1() < 1.0);
}

#[test]
fn corpus_aggregation() {
    let ptb = Dialect::shipped_ptb();
    let docs = vec![paul_tree(), paul_tree()];
    let score = |g: &AnnotationDoc, t: &AnnotationDoc| parseval(&brackets_of(g, &ptb)?, &brackets_of(t, &ptb)?, true);
    let r = aggregate(&docs, &docs, Execution::Parallel, score).unwrap();
    assert_eq!((r.sentences, r.exact, r.matched, r.gold), (2, 2, 14, 14));
    assert!(r.to_tsv().contains("precision\t1.000000\n"));
    assert!(r.to_tsv().contains("label.VerbPhrase\t6/6/6\n"));
    assert!(r.to_table().contains("exact match"));
    assert!(matches!(aggregate(&docs, &docs[..1], Execution::Sequential, score), Err(EvalError::CountMismatch { .. })));
}

#[test]
fn empty_sides() {
    let e = set(2, &[]);
    let r = parseval(&e, &e, true).unwrap();
    assert_eq!((r.precision(), r.recall(), r.f1()), (1.0, 1.0, 1.0));
    let g = set(2, &[(1, 2, "S")]);
    let r = parseval(&g, &e, true).unwrap();
    assert_eq!((r.precision(), r.recall(), r.f1()), (1.0, 0.0, 0.0));
}
