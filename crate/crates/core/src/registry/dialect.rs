use std::collections::BTreeMap;

use serde::Deserialize;

use super::{Dcs, Registry, RegistryError};

/// How a feature is realised in concrete markup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstantiationStyle {
    /// `<cat>NP</cat>`
    Element,
    /// `cat="NP"` on the enclosing struct
    Attribute,
    /// `<gram type="cat">NP</gram>`
    TypedElement,
    /// `<cat value="NP"/>`
    ValuedElement,
}

/// Structural rewrites applied by concrete markup.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct Expansions {
    /// Wrap runs of features and runs of relations of a struct in grouping
    /// sub-elements.
    pub group_features_and_relations: bool,
    pub feature_group: String,
    pub relation_group: String,
    /// Element name used by the typed-element style.
    pub typed_element: String,
}

impl Default for Expansions {
    fn default() -> Self {
        Expansions {
            group_features_and_relations: false,
            feature_group: "feats".into(),
            relation_group: "rels".into(),
            typed_element: "gram".into(),
        }
    }
}

/// A project vocabulary (bijective local name <-> registry id) plus the
/// rendering rules of its concrete markup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialect {
    name: String,
    to_id: BTreeMap<String, String>,
    to_local: BTreeMap<String, String>,
    styles: BTreeMap<String, InstantiationStyle>,
    expansions: Expansions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DialectFile {
    name: String,
    #[serde(default)]
    vocab: BTreeMap<String, String>,
    #[serde(default)]
    styles: BTreeMap<String, InstantiationStyle>,
    #[serde(default)]
    expansions: Expansions,
}

/// Names the concrete reader interprets structurally.
pub(crate) const RESERVED_ELEMENTS: &[&str] = &["struct", "feat", "rel", "seg", "brack", "alt", "doc", "s", "w", "corpus"];
pub(crate) const RESERVED_ATTRIBUTES: &[&str] = &["id", "ref", "xml:base"];

const SHIPPED_PTB: &str = include_str!("../../data/ptb.dialect.toml");
const SHIPPED_DEP: &str = include_str!("../../data/dep.dialect.toml");
const SHIPPED_FRENCH: &str = include_str!("../../data/french.dialect.toml");

impl Dialect {
    pub fn new(
        name: impl Into<String>,
        vocab: impl IntoIterator<Item = (String, String)>,
        styles: BTreeMap<String, InstantiationStyle>,
        expansions: Expansions,
    ) -> Result<Self, RegistryError> {
        let name = name.into();
        let err = |message: String| RegistryError::Dialect {
            dialect: name.clone(),
            message,
        };
        let mut to_id = BTreeMap::new();
        let mut to_local = BTreeMap::new();
        for (local, id) in vocab {
            if local.is_empty() || id.is_empty() {
                return Err(err("empty vocabulary entry".into()));
            }
            if let Some(other) = to_local.insert(id.clone(), local.clone()) {
                return Err(err(format!("`{other}` and `{local}` both map to `{id}`")));
            }
            if to_id.insert(local.clone(), id).is_some() {
                return Err(err(format!("`{local}` mapped twice")));
            }
        }
        let groups = [
            expansions.feature_group.as_str(),
            expansions.relation_group.as_str(),
            expansions.typed_element.as_str(),
        ];
        for g in groups {
            if !is_xml_name(g) || RESERVED_ELEMENTS.contains(&g) {
                return Err(err(format!("`{g}` cannot be used as an element name")));
            }
        }
        if groups[0] == groups[1] || groups[0] == groups[2] || groups[1] == groups[2] {
            return Err(err("grouping and typed-element names must differ".into()));
        }
        for (key, style) in &styles {
            if !is_xml_name(key) {
                return Err(err(format!("feature key `{key}` is not an XML name")));
            }
            let clash = match style {
                InstantiationStyle::Attribute => RESERVED_ATTRIBUTES.contains(&key.as_str()),
                InstantiationStyle::Element | InstantiationStyle::ValuedElement => {
                    RESERVED_ELEMENTS.contains(&key.as_str()) || groups.contains(&key.as_str())
                }
                InstantiationStyle::TypedElement => false,
            };
            if clash {
                return Err(err(format!("feature key `{key}` clashes with a reserved name")));
            }
        }
        Ok(Dialect {
            name,
            to_id,
            to_local,
            styles,
            expansions,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, RegistryError> {
        let file: DialectFile = toml::from_str(text).map_err(|e| RegistryError::Format(e.to_string()))?;
        Dialect::new(file.name, file.vocab, file.styles, file.expansions)
    }

    pub fn shipped_ptb() -> Self {
        Dialect::from_toml(SHIPPED_PTB).expect("shipped ptb dialect is valid")
    }

    pub fn shipped_dep() -> Self {
        Dialect::from_toml(SHIPPED_DEP).expect("shipped dep dialect is valid")
    }

    pub fn shipped_french() -> Self {
        Dialect::from_toml(SHIPPED_FRENCH).expect("shipped french dialect is valid")
    }

    /// Same vocabulary and expansions with different instantiation styles.
    pub fn with_styles(&self, styles: BTreeMap<String, InstantiationStyle>) -> Result<Self, RegistryError> {
        Dialect::new(
            self.name.clone(),
            self.to_id.clone(),
            styles,
            self.expansions.clone(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn normalize(&self, local: &str) -> Result<&str, RegistryError> {
        self.to_id
            .get(local)
            .map(String::as_str)
            .ok_or_else(|| RegistryError::Unmapped {
                dialect: self.name.clone(),
                label: local.to_string(),
            })
    }

    pub fn local_name(&self, id: &str) -> Option<&str> {
        self.to_local.get(id).map(String::as_str)
    }

    /// Rewrites a label of `source`'s vocabulary into this dialect's.
    pub fn translate_from(&self, source: &Dialect, label: &str) -> Result<&str, RegistryError> {
        let id = source.normalize(label)?;
        self.local_name(id).ok_or_else(|| RegistryError::Unmapped {
            dialect: self.name.clone(),
            label: id.to_string(),
        })
    }

    pub fn vocab(&self) -> impl Iterator<Item = (&str, &str)> {
        self.to_id.iter().map(|(l, i)| (l.as_str(), i.as_str()))
    }

    pub fn style(&self, local_key: &str) -> Option<InstantiationStyle> {
        self.styles.get(local_key).copied()
    }

    pub fn styles(&self) -> &BTreeMap<String, InstantiationStyle> {
        &self.styles
    }

    pub fn expansions(&self) -> &Expansions {
        &self.expansions
    }

    /// Problems with this dialect against a registry and, optionally, a DCS.
    pub fn check(&self, registry: &Registry, dcs: Option<&Dcs>) -> Vec<String> {
        let mut out = Vec::new();
        for (local, id) in &self.to_id {
            if !registry.contains(id) {
                out.push(format!("`{local}` maps to unknown category `{id}`"));
            } else if let Some(dcs) = dcs {
                if !dcs.admits(id) {
                    out.push(format!("`{local}` maps to `{id}`, which the DCS does not admit"));
                }
            }
        }
        out
    }
}

pub(crate) fn is_xml_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}
