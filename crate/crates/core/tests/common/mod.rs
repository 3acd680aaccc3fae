//! Seeded generators shared by the integration tests and the acceptance
//! harness.
#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synpivot::eval::{Bracket, BracketSet};
use synpivot::pivot::{tokens_from_words, Alt, AnnotationDoc, Brack, Feat, FeatValue, Node, NodeItem, Rel, Token};
use synpivot::ptb::{PtbLabel, PtbTree};
use synpivot::registry::{CategoryKind, DataCategory, Dialect, Expansions, InstantiationStyle, Registry};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const PHRASES: &[&str] = &["S", "NP", "VP", "PP", "ADJP", "ADVP", "SBAR"];
pub const TAGS: &[&str] = &["SBJ", "DIR", "ADV", "TMP", "LOC", "PRD"];
pub const WORDS: &[&str] = &[
    "the", "dog", "saw", "a", "cat", "ran", "into", "room", "quickly", "big", "old", "him", "said", "door",
];

enum G {
    Word(&'static str),
    Node { serial: usize, cat: &'static str, tags: Vec<&'static str>, kids: Vec<G> },
    Trace { cat: &'static str, tags: Vec<&'static str>, target: usize },
}

struct TreeGen<'r> {
    rng: &'r mut ChaCha8Rng,
    serial: usize,
    done: Vec<(usize, &'static str)>,
    targets: BTreeSet<usize>,
    words: usize,
    max_words: usize,
    traces: bool,
}

impl TreeGen<'_> {
    fn word(&mut self) -> G {
        self.words += 1;
        G::Word(WORDS.choose(self.rng).unwrap())
    }

    fn tags(&mut self, p: f64) -> Vec<&'static str> {
        if self.rng.random_bool(p) {
            vec![TAGS.choose(self.rng).unwrap()]
        } else {
            vec![]
        }
    }

    fn node(&mut self, depth: usize, root: bool) -> G {
        let serial = self.serial;
        self.serial += 1;
        let cat = if root { "S" } else { PHRASES.choose(self.rng).unwrap() };
        let tags = if root { vec![] } else { self.tags(0.3) };
        let before = self.words;
        let mut kids = Vec::new();
        for _ in 0..self.rng.random_range(1..=3) {
            let r: f64 = self.rng.random();
            if depth < 3 && r < 0.45 && self.words < self.max_words {
                kids.push(self.node(depth + 1, false));
            } else if self.traces && r < 0.55 && !self.done.is_empty() {
                let &(target, cat) = self.done.choose(self.rng).unwrap();
                self.targets.insert(target);
                let tags = self.tags(0.5);
                kids.push(G::Trace { cat, tags, target });
            } else if self.words < self.max_words {
                kids.push(self.word());
            }
        }
        if self.words == before {
            let at = self.rng.random_range(0..=kids.len());
            let w = self.word();
            kids.insert(at, w);
        }
        self.done.push((serial, cat));
        G::Node { serial, cat, tags, kids }
    }

    fn render(&self, g: &G) -> PtbTree {
        let index = |serial: usize| self.targets.iter().position(|&t| t == serial).unwrap() as u32 + 1;
        match g {
            G::Word(w) => PtbTree::leaf(*w),
            G::Node { serial, cat, tags, kids } => {
                let label = PtbLabel {
                    category: cat.to_string(),
                    function_tags: tags.iter().map(|t| t.to_string()).collect(),
                    coindex: self.targets.contains(serial).then(|| index(*serial)),
                };
                PtbTree::node(label.render(), kids.iter().map(|k| self.render(k)).collect())
            }
            G::Trace { cat, tags, target } => {
                let label = PtbLabel {
                    category: cat.to_string(),
                    function_tags: tags.iter().map(|t| t.to_string()).collect(),
                    coindex: None,
                };
                PtbTree::node(label.render(), vec![PtbTree::leaf(format!("*-{}", index(*target)))])
            }
        }
    }
}

/// A random tree rooted in `S`, without punctuation, with at most about
/// `max_words` words. Every bracket dominates a word; traces point at
/// earlier, non-dominating brackets of the same category.
pub fn random_tree(rng: &mut ChaCha8Rng, max_words: usize, traces: bool) -> PtbTree {
    let mut g = TreeGen {
        rng,
        serial: 0,
        done: Vec::new(),
        targets: BTreeSet::new(),
        words: 0,
        max_words: max_words.max(1),
        traces,
    };
    let root = g.node(0, true);
    g.render(&root)
}

/// Words of a tree joined by single spaces.
pub fn sentence_of(tree: &PtbTree) -> String {
    tree.leaves().into_iter().filter(|l| !l.starts_with('*')).collect::<Vec<_>>().join(" ")
}

/// Relation labels of the shipped dependency dialect.
pub fn dep_relations() -> Vec<String> {
    let reg = Registry::shipped();
    Dialect::shipped_dep()
        .vocab()
        .filter(|(_, id)| reg.get(id).is_ok_and(|c| c.kind == CategoryKind::RelationType))
        .map(|(l, _)| l.to_string())
        .collect()
}

/// A flat dependency pivot over 1..=7 tokens, rels ordered by head then
/// dependent position.
pub fn random_dep_doc(rng: &mut ChaCha8Rng, labels: &[String]) -> AnnotationDoc {
    let n = rng.random_range(1..=7);
    let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    random_rels_over(rng, tokens_from_words(&words), labels)
}

/// Random rels over the given tokens.
pub fn random_rels_over(rng: &mut ChaCha8Rng, tokens: Vec<Token>, labels: &[String]) -> AnnotationDoc {
    let n = tokens.len();
    let mut rels = Vec::new();
    for _ in 0..rng.random_range(0..=n + 1) {
        let h = rng.random_range(0..n);
        let mut rel = Rel::new(labels.choose(rng).unwrap().clone(), tokens[h].id.clone());
        let d = rng.random_bool(0.8).then(|| rng.random_range(0..n));
        if let Some(d) = d {
            rel.dependent = Some(tokens[d].id.clone());
        }
        if rng.random_bool(0.2) {
            rel.introducer = Some(tokens[rng.random_range(0..n)].id.clone());
        }
        if rng.random_bool(0.1) {
            rel.initial = Some(["agent", "theme"].choose(rng).unwrap().to_string());
        }
        rels.push(((h, d.unwrap_or(usize::MAX)), rel));
    }
    rels.sort_by_key(|(k, _)| *k);
    let mut root = Node::anonymous();
    root.content = rels.into_iter().map(|(_, r)| NodeItem::Rel(r)).collect();
    AnnotationDoc::new("", tokens, root)
}

/// Adds markup the tree converter never produces: a bracketed run of
/// children, an alternative, free-text features, a base URI.
pub fn decorate(rng: &mut ChaCha8Rng, doc: &mut AnnotationDoc, extra_key: &str) {
    if rng.random_bool(0.3) {
        doc.base_uri = Some("corpus.xml#s1".to_string());
    }
    let mut serial = 0;
    decorate_node(rng, &mut doc.root, extra_key, &mut serial);
}

fn decorate_node(rng: &mut ChaCha8Rng, node: &mut Node, key: &str, serial: &mut usize) {
    for item in node.content.iter_mut() {
        if let NodeItem::Node(n) = item {
            decorate_node(rng, n, key, serial);
        }
    }
    if rng.random_bool(0.2) {
        let value = ["a&b", "x<y>z", "say \"hi\"", "tab\there", "plain"].choose(rng).unwrap();
        node.content.push(NodeItem::Feat(Feat {
            key: key.to_string(),
            value: FeatValue::Inline(value.to_string()),
        }));
    }
    if rng.random_bool(0.1) {
        node.content.push(NodeItem::Feat(Feat {
            key: key.to_string(),
            value: FeatValue::Target("other.xml#n4".to_string()),
        }));
    }
    let child_nodes: Vec<usize> = (0..node.content.len())
        .filter(|&i| matches!(node.content[i], NodeItem::Node(_)))
        .collect();
    if let Some(&i) = child_nodes.choose(rng) {
        if rng.random_bool(0.15) {
            let NodeItem::Node(n) = node.content[i].clone() else { unreachable!() };
            let mut other = n.clone();
            *serial += 1;
            other.id = Some(format!("alt{serial}"));
            strip_ids(&mut other, *serial);
            node.content[i] = NodeItem::Alt(Alt {
                alternatives: vec![vec![NodeItem::Node(n)], vec![NodeItem::Node(other)]],
            });
        } else if rng.random_bool(0.15) {
            let item = node.content.remove(i);
            node.content.insert(i, NodeItem::Brack(Brack { items: vec![item] }));
        }
    }
}

/// Fresh ids for a copied subtree so the copy does not collide, with refs
/// inside it dropped.
fn strip_ids(node: &mut Node, serial: usize) {
    node.reference = None;
    let mut k = 0;
    fn walk(n: &mut Node, serial: usize, k: &mut usize, top: bool) {
        if !top {
            *k += 1;
            n.id = Some(format!("alt{serial}_{k}"));
            n.reference = None;
        }
        n.content.retain(|i| !matches!(i, NodeItem::Rel(_)));
        for item in n.content.iter_mut() {
            if let NodeItem::Node(c) = item {
                walk(c, serial, k, false);
            }
        }
    }
    walk(node, serial, &mut k, true);
}

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

fn random_name(rng: &mut ChaCha8Rng, prefix: &str) -> String {
    let n = rng.random_range(1..=5);
    let tail: String = (0..n).map(|_| *LETTERS.choose(rng).unwrap() as char).collect();
    format!("{prefix}{tail}")
}

pub const STYLES: [InstantiationStyle; 4] = [
    InstantiationStyle::Element,
    InstantiationStyle::Attribute,
    InstantiationStyle::TypedElement,
    InstantiationStyle::ValuedElement,
];

/// A renaming of the shipped treebank vocabulary with random styles for
/// its feature keys and random grouping.
pub fn random_dialect(rng: &mut ChaCha8Rng) -> Dialect {
    let reg = Registry::shipped();
    let ptb = Dialect::shipped_ptb();
    let mut used = BTreeSet::new();
    let mut vocab = Vec::new();
    let mut styles = BTreeMap::new();
    for (_, id) in ptb.vocab() {
        let is_key = reg.get(id).is_ok_and(|c| c.kind == CategoryKind::FeatureKey);
        let local = loop {
            let name = random_name(rng, if is_key { "k" } else { "L" });
            if used.insert(name.clone()) {
                break name;
            }
        };
        if is_key {
            if let Some(style) = [None, Some(STYLES[0]), Some(STYLES[1]), Some(STYLES[2]), Some(STYLES[3])]
                .choose(rng)
                .unwrap()
            {
                styles.insert(local.clone(), *style);
            }
        }
        vocab.push((local, id.to_string()));
    }
    let expansions = Expansions {
        group_features_and_relations: rng.random_bool(0.5),
        feature_group: ["feats", "traits", "fs"].choose(rng).unwrap().to_string(),
        relation_group: ["rels", "relations", "links"].choose(rng).unwrap().to_string(),
        typed_element: ["gram", "attr"].choose(rng).unwrap().to_string(),
    };
    Dialect::new("random", vocab, styles, expansions).expect("generated dialect is valid")
}

/// A registry of relation types as a random forest over `n` categories.
pub fn random_registry(rng: &mut ChaCha8Rng, n: usize) -> Registry {
    let cats = (0..n)
        .map(|i| DataCategory {
            id: format!("c{i}"),
            kind: CategoryKind::RelationType,
            parent: (i > 0 && rng.random_bool(0.8)).then(|| format!("c{}", rng.random_range(0..i))),
            description: String::new(),
            values: None,
        })
        .collect();
    Registry::new(cats).expect("parents precede children")
}

/// Local name = registry id.
pub fn identity_dialect(registry: &Registry) -> Dialect {
    Dialect::new(
        "identity",
        registry.categories().map(|c| (c.id.clone(), c.id.clone())),
        BTreeMap::new(),
        Expansions::default(),
    )
    .unwrap()
}

/// Random labeled spans over `len` tokens, duplicates allowed.
pub fn random_brackets(rng: &mut ChaCha8Rng, len: usize) -> BracketSet {
    let brackets = (0..rng.random_range(0..=8))
        .map(|_| {
            let a = rng.random_range(1..=len);
            let b = rng.random_range(1..=len);
            Bracket::new(a.min(b), a.max(b), *["A", "B", "C"].choose(rng).unwrap())
        })
        .collect();
    BracketSet::new(len, brackets)
}

/// Largest one-to-one matching between test and gold brackets with equal
/// span (and label), found by exhaustive search.
pub fn oracle_matched(gold: &BracketSet, test: &BracketSet, labeled: bool) -> usize {
    fn best(
        i: usize,
        used: u64,
        gold: &[Bracket],
        test: &[Bracket],
        labeled: bool,
        memo: &mut HashMap<(usize, u64), usize>,
    ) -> usize {
        if i == test.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, used)) {
            return v;
        }
        let mut v = best(i + 1, used, gold, test, labeled, memo);
        for (j, g) in gold.iter().enumerate() {
            let same = g.start == test[i].start && g.end == test[i].end && (!labeled || g.label == test[i].label);
            if same && used & (1 << j) == 0 {
                v = v.max(1 + best(i + 1, used | (1 << j), gold, test, labeled, memo));
            }
        }
        memo.insert((i, used), v);
        v
    }
    assert!(gold.brackets.len() < 64);
    best(0, 0, &gold.brackets, &test.brackets, labeled, &mut HashMap::new())
}

/// Test brackets whose token sets overlap some gold bracket's without
/// either containing the other.
pub fn oracle_crossing(gold: &BracketSet, test: &BracketSet) -> usize {
    let set = |b: &Bracket| (b.start..=b.end).collect::<BTreeSet<usize>>();
    test.brackets
        .iter()
        .filter(|t| {
            let ts = set(t);
            gold.brackets.iter().any(|g| {
                let gs = set(g);
                !ts.is_disjoint(&gs) && !ts.is_subset(&gs) && !gs.is_subset(&ts)
            })
        })
        .count()
}
