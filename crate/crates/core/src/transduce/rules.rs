use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::TransduceError;

const SHIPPED: &str = include_str!("../../data/head_rules.txt");

/// Search direction of a head preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// What a head preference or relation entry matches among daughters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Cat(String),
    Token,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadPref {
    pub direction: Direction,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HeadEntry {
    pub prefs: Vec<HeadPref>,
    /// Token daughters preceding the head daughter are introducers.
    pub introducers: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Before,
    After,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationEntry {
    /// `None` matches any parent.
    pub parent: Option<String>,
    pub child: Target,
    pub position: Position,
    pub label: String,
}

/// An untagged `nominal` right after verbal head material receives `label`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicitObject {
    pub label: String,
    pub verbal: String,
    pub nominal: String,
}

/// Shape of one daughter as the head table sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaughterKind<'a> {
    Token,
    Node(Option<&'a str>),
}

impl DaughterKind<'_> {
    fn matches(&self, target: &Target) -> bool {
        match (target, self) {
            (Target::Any, _) => true,
            (Target::Token, DaughterKind::Token) => true,
            (Target::Cat(c), DaughterKind::Node(Some(cat))) => c == cat,
            _ => false,
        }
    }
}

/// Head-percolation table, relation map and implicit-object rule.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HeadRules {
    heads: BTreeMap<String, HeadEntry>,
    relations: Vec<RelationEntry>,
    implicit_object: Option<ImplicitObject>,
}

impl HeadRules {
    /// Line format, `#` starts a comment:
    ///
    /// ```text
    /// head PARENT [left:|right:]TARGET ... [introducers]
    /// relation PARENT|* TARGET before|after|* LABEL
    /// implicit-object LABEL VERBAL NOMINAL
    /// ```
    ///
    /// TARGET is a category, `tok` (a token daughter) or `*`.
    pub fn parse(text: &str) -> Result<Self, TransduceError> {
        let mut rules = HeadRules::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| TransduceError::Rules { line: n + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "head" => {
                    let parent = fields.get(1).ok_or_else(|| err("missing parent category".into()))?;
                    let mut entry = HeadEntry::default();
                    for f in &fields[2..] {
                        if *f == "introducers" {
                            entry.introducers = true;
                            continue;
                        }
                        let (direction, target) = match f.split_once(':') {
                            Some(("left", t)) => (Direction::Left, t),
                            Some(("right", t)) => (Direction::Right, t),
                            Some((d, _)) => return Err(err(format!("unknown direction `{d}`"))),
                            None => (Direction::Left, *f),
                        };
                        entry.prefs.push(HeadPref {
                            direction,
                            target: target_of(target),
                        });
                    }
                    if rules.heads.insert(parent.to_string(), entry).is_some() {
                        return Err(err(format!("second head entry for `{parent}`")));
                    }
                }
                "relation" => {
                    let [_, parent, child, pos, label] = fields[..] else {
                        return Err(err("expected: relation PARENT CHILD POSITION LABEL".into()));
                    };
                    let position = match pos {
                        "before" => Position::Before,
                        "after" => Position::After,
                        "*" => Position::Any,
                        other => return Err(err(format!("unknown position `{other}`"))),
                    };
                    rules.relations.push(RelationEntry {
                        parent: (parent != "*").then(|| parent.to_string()),
                        child: target_of(child),
                        position,
                        label: label.to_string(),
                    });
                }
                "implicit-object" => {
                    let [_, label, verbal, nominal] = fields[..] else {
                        return Err(err("expected: implicit-object LABEL VERBAL NOMINAL".into()));
                    };
                    rules.implicit_object = Some(ImplicitObject {
                        label: label.into(),
                        verbal: verbal.into(),
                        nominal: nominal.into(),
                    });
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        Ok(rules)
    }

    /// The shipped table: S and SBAR head on their clause, VP on an inner VP
    /// or its verb, PP on its object with the preposition as introducer, NP
    /// on its last word.
    pub fn shipped() -> Self {
        HeadRules::parse(SHIPPED).expect("shipped head rules are valid")
    }

    pub fn entry(&self, parent: &str) -> Option<&HeadEntry> {
        self.heads.get(parent)
    }

    pub fn implicit_object(&self) -> Option<&ImplicitObject> {
        self.implicit_object.as_ref()
    }

    pub fn relations(&self) -> &[RelationEntry] {
        &self.relations
    }

    /// Index of the head daughter; the leftmost daughter when no preference
    /// matches. `None` only for an empty daughter list.
    pub fn select_head(&self, parent: Option<&str>, daughters: &[DaughterKind<'_>]) -> Option<usize> {
        if daughters.is_empty() {
            return None;
        }
        if let Some(entry) = parent.and_then(|p| self.heads.get(p)) {
            for pref in &entry.prefs {
                let hit = match pref.direction {
                    Direction::Left => daughters.iter().position(|d| d.matches(&pref.target)),
                    Direction::Right => daughters.iter().rposition(|d| d.matches(&pref.target)),
                };
                if hit.is_some() {
                    return hit;
                }
            }
        }
        Some(0)
    }

    pub fn has_introducers(&self, parent: Option<&str>) -> bool {
        parent
            .and_then(|p| self.heads.get(p))
            .is_some_and(|e| e.introducers)
    }

    /// Label for an untagged non-head daughter.
    pub fn relation_label(&self, parent: Option<&str>, child: DaughterKind<'_>, before_head: bool) -> Option<&str> {
        self.relations
            .iter()
            .find(|r| {
                let parent_ok = match (&r.parent, parent) {
                    (None, _) => true,
                    (Some(p), Some(q)) => p == q,
                    (Some(_), None) => false,
                };
                let pos_ok = match r.position {
                    Position::Any => true,
                    Position::Before => before_head,
                    Position::After => !before_head,
                };
                parent_ok && pos_ok && child.matches(&r.child)
            })
            .map(|r| r.label.as_str())
    }

    /// Text form accepted by [`HeadRules::parse`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        let show = |t: &Target| match t {
            Target::Cat(c) => c.clone(),
            Target::Token => "tok".into(),
            Target::Any => "*".into(),
        };
        for (parent, entry) in &self.heads {
            let _ = write!(out, "head {parent}");
            for p in &entry.prefs {
                let dir = if p.direction == Direction::Left { "left" } else { "right" };
                let _ = write!(out, " {dir}:{}", show(&p.target));
            }
            if entry.introducers {
                out.push_str(" introducers");
            }
            out.push('\n');
        }
        for r in &self.relations {
            let pos = match r.position {
                Position::Before => "before",
                Position::After => "after",
                Position::Any => "*",
            };
            let _ = writeln!(
                out,
                "relation {} {} {pos} {}",
                r.parent.as_deref().unwrap_or("*"),
                show(&r.child),
                r.label
            );
        }
        if let Some(io) = &self.implicit_object {
            let _ = writeln!(out, "implicit-object {} {} {}", io.label, io.verbal, io.nominal);
        }
        out
    }
}

fn target_of(s: &str) -> Target {
    match s {
        "tok" => Target::Token,
        "*" => Target::Any,
        c => Target::Cat(c.to_string()),
    }
}
