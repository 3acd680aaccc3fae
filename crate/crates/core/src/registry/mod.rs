//! Data categories: the global label hierarchy ([`Registry`]), a project's
//! admitted subset with constraints ([`Dcs`]) and project vocabularies with
//! rendering styles ([`Dialect`]).

mod dcs;
mod dialect;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Deserialize;
use thiserror::Error;

pub use dcs::{check_dcs, Dcs, DcsViolation, DcsViolationKind, Placement, ValueConstraint};
pub use dialect::{Dialect, Expansions, InstantiationStyle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("unknown data category `{0}`")]
    UnknownCategory(String),
    #[error("label `{label}` is not mapped by dialect `{dialect}`")]
    Unmapped { dialect: String, label: String },
    #[error("duplicate data category `{0}`")]
    Duplicate(String),
    #[error("parent chain of `{0}` does not terminate")]
    Cycle(String),
    #[error("`{child}` has kind {child_kind} but its parent `{parent}` has kind {parent_kind}")]
    KindMismatch {
        child: String,
        child_kind: CategoryKind,
        parent: String,
        parent_kind: CategoryKind,
    },
    #[error("dialect `{dialect}`: {message}")]
    Dialect { dialect: String, message: String },
    #[error("dcs: {0}")]
    Dcs(String),
    #[error("{0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CategoryKind {
    RelationType,
    ConstituentCategory,
    FeatureKey,
}

impl fmt::Display for CategoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CategoryKind::RelationType => "relation-type",
            CategoryKind::ConstituentCategory => "constituent-category",
            CategoryKind::FeatureKey => "feature-key",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataCategory {
    pub id: String,
    pub kind: CategoryKind,
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default)]
    pub description: String,
    /// For feature keys whose values are themselves registry labels (CAT).
    #[serde(default)]
    pub values: Option<CategoryKind>,
}

/// The hierarchical inventory of data categories. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    categories: BTreeMap<String, DataCategory>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    category: Vec<DataCategory>,
}

const SHIPPED_REGISTRY: &str = include_str!("../../data/registry.toml");

impl Registry {
    pub fn new(categories: Vec<DataCategory>) -> Result<Self, RegistryError> {
        let mut map = BTreeMap::new();
        for cat in categories {
            if map.contains_key(&cat.id) {
                return Err(RegistryError::Duplicate(cat.id));
            }
            map.insert(cat.id.clone(), cat);
        }
        let reg = Registry { categories: map };
        for cat in reg.categories.values() {
            if let Some(parent_id) = &cat.parent {
                let parent = reg
                    .categories
                    .get(parent_id)
                    .ok_or_else(|| RegistryError::UnknownCategory(parent_id.clone()))?;
                if parent.kind != cat.kind {
                    return Err(RegistryError::KindMismatch {
                        child: cat.id.clone(),
                        child_kind: cat.kind,
                        parent: parent.id.clone(),
                        parent_kind: parent.kind,
                    });
                }
            }
            reg.depth(&cat.id)?;
        }
        Ok(reg)
    }

    pub fn from_toml(text: &str) -> Result<Self, RegistryError> {
        let file: RegistryFile = toml::from_str(text).map_err(|e| RegistryError::Format(e.to_string()))?;
        Registry::new(file.category)
    }

    /// The registry shipped with the crate: the dependent/argument/modifier
    /// seed hierarchy plus the labels used by the shipped dialects.
    pub fn shipped() -> Self {
        Registry::from_toml(SHIPPED_REGISTRY).expect("shipped registry is valid")
    }

    pub fn get(&self, id: &str) -> Result<&DataCategory, RegistryError> {
        self.categories
            .get(id)
            .ok_or_else(|| RegistryError::UnknownCategory(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.categories.contains_key(id)
    }

    pub fn categories(&self) -> impl Iterator<Item = &DataCategory> {
        self.categories.values()
    }

    /// `id` followed by its ancestors up to the root.
    pub fn chain(&self, id: &str) -> Result<Vec<&str>, RegistryError> {
        let mut out = Vec::new();
        let mut current = self.get(id)?;
        loop {
            out.push(current.id.as_str());
            if out.len() > self.categories.len() {
                return Err(RegistryError::Cycle(id.to_string()));
            }
            match &current.parent {
                Some(p) => current = self.get(p)?,
                None => return Ok(out),
            }
        }
    }

    /// Roots have depth 1.
    pub fn depth(&self, id: &str) -> Result<usize, RegistryError> {
        Ok(self.chain(id)?.len())
    }

    pub fn max_depth(&self) -> usize {
        self.categories
            .keys()
            .filter_map(|id| self.depth(id).ok())
            .max()
            .unwrap_or(0)
    }

    /// True iff `general` lies on `specific`'s parent chain (reflexive).
    pub fn subsumes(&self, general: &str, specific: &str) -> Result<bool, RegistryError> {
        self.get(general)?;
        Ok(self.chain(specific)?.contains(&general))
    }

    /// The ancestor of `id` at depth `granularity`, or `id` itself when it
    /// is already at most that deep.
    pub fn truncate(&self, id: &str, granularity: usize) -> Result<&str, RegistryError> {
        let chain = self.chain(id)?;
        let depth = chain.len();
        if granularity == 0 || depth <= granularity {
            return Ok(chain[0]);
        }
        Ok(chain[depth - granularity])
    }

    pub fn children(&self, id: &str) -> Vec<&DataCategory> {
        self.categories
            .values()
            .filter(|c| c.parent.as_deref() == Some(id))
            .collect()
    }

    /// Indented tree listing grouped by kind.
    pub fn render_tree(&self) -> String {
        let mut out = String::new();
        for kind in [
            CategoryKind::RelationType,
            CategoryKind::ConstituentCategory,
            CategoryKind::FeatureKey,
        ] {
            let _ = writeln!(out, "[{kind}]");
            for root in self.categories.values().filter(|c| c.kind == kind && c.parent.is_none()) {
                self.render_subtree(root, 1, &mut out);
            }
        }
        out
    }

    fn render_subtree(&self, cat: &DataCategory, depth: usize, out: &mut String) {
        let _ = if cat.description.is_empty() {
            writeln!(out, "{}{}", "  ".repeat(depth), cat.id)
        } else {
            writeln!(out, "{}{}: {}", "  ".repeat(depth), cat.id, cat.description)
        };
        for child in self.children(&cat.id) {
            self.render_subtree(child, depth + 1, out);
        }
    }
}

/// Registry id for a project-local label.
pub fn normalize_label<'d>(dialect: &'d Dialect, local: &str) -> Result<&'d str, RegistryError> {
    dialect.normalize(local)
}

/// Whether two labels from (possibly different) dialects denote the same
/// category once both are truncated to `granularity`.
pub fn equivalent(
    dialect_a: &Dialect,
    a: &str,
    dialect_b: &Dialect,
    b: &str,
    registry: &Registry,
    granularity: usize,
) -> Result<bool, RegistryError> {
    let a = registry.truncate(dialect_a.normalize(a)?, granularity)?;
    let b = registry.truncate(dialect_b.normalize(b)?, granularity)?;
    Ok(a == b)
}
