use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Deserialize;

use super::{Dialect, Registry, RegistryError};
use crate::pivot::{AnnotationDoc, FeatValue, Node, NodeItem};

/// Allowed values of a feature key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueConstraint {
    Open,
    /// Registry ids for keys whose values are categories, raw strings otherwise.
    Closed(BTreeSet<String>),
}

impl ValueConstraint {
    pub fn allows(&self, value: &str) -> bool {
        match self {
            ValueConstraint::Open => true,
            ValueConstraint::Closed(set) => set.contains(value),
        }
    }
}

/// Structural context of the node carrying a feature or relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    Root,
    Internal,
    Leaf,
    Any,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::Root => "root",
            Placement::Internal => "internal",
            Placement::Leaf => "leaf",
            Placement::Any => "any",
        })
    }
}

/// A project's admitted subset of the registry with value and placement
/// constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dcs {
    pub name: String,
    admitted: BTreeSet<String>,
    values: BTreeMap<String, ValueConstraint>,
    placement: BTreeMap<String, BTreeSet<Placement>>,
    granularity: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawValues {
    Keyword(String),
    List(Vec<String>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPlacement {
    One(Placement),
    Many(Vec<Placement>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DcsFile {
    #[serde(default)]
    name: String,
    granularity: usize,
    admitted: Vec<String>,
    #[serde(default)]
    values: BTreeMap<String, RawValues>,
    #[serde(default)]
    placement: BTreeMap<String, RawPlacement>,
}

const SHIPPED_PTB: &str = include_str!("../../data/ptb.dcs.toml");
const SHIPPED_DEP: &str = include_str!("../../data/dep.dcs.toml");

impl Dcs {
    pub fn new(
        name: impl Into<String>,
        admitted: impl IntoIterator<Item = String>,
        values: BTreeMap<String, ValueConstraint>,
        placement: BTreeMap<String, BTreeSet<Placement>>,
        granularity: usize,
        registry: &Registry,
    ) -> Result<Self, RegistryError> {
        if granularity == 0 {
            return Err(RegistryError::Dcs("granularity must be at least 1".into()));
        }
        let admitted: BTreeSet<String> = admitted.into_iter().collect();
        for id in admitted.iter().chain(values.keys()).chain(placement.keys()) {
            registry.get(id)?;
        }
        for (key, constraint) in &values {
            if !admitted.contains(key) {
                return Err(RegistryError::Dcs(format!("value constraint on unadmitted `{key}`")));
            }
            if let (ValueConstraint::Closed(set), Some(_)) = (constraint, registry.get(key)?.values) {
                for v in set {
                    registry.get(v)?;
                }
            }
        }
        Ok(Dcs {
            name: name.into(),
            admitted,
            values,
            placement,
            granularity,
        })
    }

    pub fn from_toml(text: &str, registry: &Registry) -> Result<Self, RegistryError> {
        let file: DcsFile = toml::from_str(text).map_err(|e| RegistryError::Format(e.to_string()))?;
        let mut values = BTreeMap::new();
        for (key, raw) in file.values {
            let c = match raw {
                RawValues::Keyword(k) if k == "open" => ValueConstraint::Open,
                RawValues::Keyword(k) => {
                    return Err(RegistryError::Dcs(format!("`{key}`: expected \"open\" or a list, found `{k}`")))
                }
                RawValues::List(list) => ValueConstraint::Closed(list.into_iter().collect()),
            };
            values.insert(key, c);
        }
        let placement = file
            .placement
            .into_iter()
            .map(|(k, p)| {
                let set = match p {
                    RawPlacement::One(p) => BTreeSet::from([p]),
                    RawPlacement::Many(ps) => ps.into_iter().collect(),
                };
                (k, set)
            })
            .collect();
        Dcs::new(file.name, file.admitted, values, placement, file.granularity, registry)
    }

    pub fn shipped_ptb(registry: &Registry) -> Result<Self, RegistryError> {
        Dcs::from_toml(SHIPPED_PTB, registry)
    }

    pub fn shipped_dep(registry: &Registry) -> Result<Self, RegistryError> {
        Dcs::from_toml(SHIPPED_DEP, registry)
    }

    pub fn admits(&self, id: &str) -> bool {
        self.admitted.contains(id)
    }

    pub fn admitted(&self) -> impl Iterator<Item = &str> {
        self.admitted.iter().map(String::as_str)
    }

    pub fn granularity(&self) -> usize {
        self.granularity
    }

    pub fn value_constraint(&self, key: &str) -> &ValueConstraint {
        self.values.get(key).unwrap_or(&ValueConstraint::Open)
    }

    pub fn placement(&self, id: &str) -> Option<&BTreeSet<Placement>> {
        self.placement.get(id)
    }

    /// Copy without `id` in the admitted set (and without its constraints).
    pub fn without(&self, id: &str) -> Dcs {
        let mut out = self.clone();
        out.admitted.remove(id);
        out.values.remove(id);
        out.placement.remove(id);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DcsViolationKind {
    NotAdmitted,
    Unmapped,
    ValueConstraint,
    Placement,
}

impl fmt::Display for DcsViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DcsViolationKind::NotAdmitted => "not-admitted",
            DcsViolationKind::Unmapped => "unmapped-label",
            DcsViolationKind::ValueConstraint => "value-constraint",
            DcsViolationKind::Placement => "placement",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcsViolation {
    /// Id of the node carrying the offending feat or rel.
    pub node: String,
    /// The local label as written in the document.
    pub label: String,
    pub kind: DcsViolationKind,
    pub detail: String,
}

impl fmt::Display for DcsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}", self.kind, self.node, self.label, self.detail)
    }
}

/// Every feat and rel of the default reading whose label is unmapped, not
/// admitted, outside its value constraint or in a disallowed context.
pub fn check_dcs(doc: &AnnotationDoc, dcs: &Dcs, dialect: &Dialect, registry: &Registry) -> Vec<DcsViolation> {
    let mut checker = Checker {
        dcs,
        dialect,
        registry,
        out: Vec::new(),
    };
    checker.node(&doc.root, true);
    checker.out
}

struct Checker<'a> {
    dcs: &'a Dcs,
    dialect: &'a Dialect,
    registry: &'a Registry,
    out: Vec<DcsViolation>,
}

impl<'a> Checker<'a> {
    fn node(&mut self, node: &Node, is_root: bool) {
        let place = if is_root {
            Placement::Root
        } else if node.child_nodes().is_empty() {
            Placement::Leaf
        } else {
            Placement::Internal
        };
        for item in node.items() {
            match item {
                NodeItem::Feat(f) => {
                    let Some(key_id) = self.label(node, &f.key, place) else {
                        continue;
                    };
                    if let FeatValue::Inline(v) = &f.value {
                        self.value(node, &f.key, key_id, v);
                    }
                }
                NodeItem::Rel(r) => {
                    self.label(node, &r.label, place);
                }
                NodeItem::Node(child) => self.node(child, false),
                _ => {}
            }
        }
    }

    fn push(&mut self, node: &Node, label: &str, kind: DcsViolationKind, detail: String) {
        self.out.push(DcsViolation {
            node: node.id_str().to_string(),
            label: label.to_string(),
            kind,
            detail,
        });
    }

    /// Normalizes and checks admission and placement; returns the registry id
    /// when the label is usable.
    fn label(&mut self, node: &Node, local: &str, place: Placement) -> Option<&'a str> {
        let dialect = self.dialect;
        let id = match dialect.normalize(local) {
            Ok(id) => id,
            Err(e) => {
                self.push(node, local, DcsViolationKind::Unmapped, e.to_string());
                return None;
            }
        };
        if !self.dcs.admits(id) {
            self.push(node, local, DcsViolationKind::NotAdmitted, format!("`{id}` is not admitted"));
            return None;
        }
        if let Some(allowed) = self.dcs.placement(id) {
            if !allowed.contains(&Placement::Any) && !allowed.contains(&place) {
                self.push(node, local, DcsViolationKind::Placement, format!("`{id}` may not appear on a {place} node"));
            }
        }
        Some(id)
    }

    fn value(&mut self, node: &Node, local_key: &str, key_id: &str, value: &str) {
        let names_category = self.registry.get(key_id).map(|c| c.values.is_some()).unwrap_or(false);
        let value_id = if names_category {
            match self.dialect.normalize(value) {
                Ok(id) => {
                    if !self.dcs.admits(id) {
                        self.push(node, value, DcsViolationKind::NotAdmitted, format!("`{id}` is not admitted"));
                        return;
                    }
                    id.to_string()
                }
                Err(e) => {
                    self.push(node, value, DcsViolationKind::Unmapped, e.to_string());
                    return;
                }
            }
        } else {
            value.to_string()
        };
        if !self.dcs.value_constraint(key_id).allows(&value_id) {
            self.push(
                node,
                local_key,
                DcsViolationKind::ValueConstraint,
                format!("value `{value}` is outside the allowed set for `{key_id}`"),
            );
        }
    }
}
