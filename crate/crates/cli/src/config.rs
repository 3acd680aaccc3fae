use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use synpivot::registry::{Dcs, Dialect, Registry};
use synpivot::transduce::HeadRules;

/// Defaults read from `--config`. Relative paths are taken from the config
/// file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub registry: Option<PathBuf>,
    pub head_rules: Option<PathBuf>,
    pub dcs: Option<PathBuf>,
    pub dialect: Option<PathBuf>,
    pub pivot_dialect: Option<PathBuf>,
    pub gold_dialect: Option<PathBuf>,
    pub test_dialect: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub granularity: Option<usize>,
    pub jobs: Option<usize>,
    pub indent: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.registry,
            &mut cfg.head_rules,
            &mut cfg.dcs,
            &mut cfg.dialect,
            &mut cfg.pivot_dialect,
            &mut cfg.gold_dialect,
            &mut cfg.test_dialect,
            &mut cfg.data_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

fn read(path: &Path, what: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {what} {}", path.display()))
}

/// Resolves resource files: explicit path, then the data directory, then
/// the built-in copy.
#[derive(Debug, Default)]
pub struct Resolver {
    pub data_dir: Option<PathBuf>,
}

impl Resolver {
    fn pick(&self, explicit: Option<&Path>, file: &str) -> Option<PathBuf> {
        explicit
            .map(Path::to_path_buf)
            .or_else(|| self.data_dir.as_ref().map(|d| d.join(file)).filter(|p| p.is_file()))
    }

    pub fn registry(&self, explicit: Option<&Path>) -> Result<Registry> {
        match self.pick(explicit, "registry.toml") {
            Some(p) => Registry::from_toml(&read(&p, "registry")?).with_context(|| format!("in registry {}", p.display())),
            None => Ok(Registry::shipped()),
        }
    }

    pub fn head_rules(&self, explicit: Option<&Path>) -> Result<HeadRules> {
        match self.pick(explicit, "head_rules.txt") {
            Some(p) => HeadRules::parse(&read(&p, "head rules")?).with_context(|| format!("in head rules {}", p.display())),
            None => Ok(HeadRules::shipped()),
        }
    }

    /// A dialect file given explicitly.
    pub fn dialect_file(path: &Path) -> Result<Dialect> {
        Dialect::from_toml(&read(path, "dialect")?).with_context(|| format!("in dialect {}", path.display()))
    }

    /// `ptb` or `dep`.
    pub fn shipped_dialect(&self, name: &str) -> Result<Dialect> {
        match self.pick(None, &format!("{name}.dialect.toml")) {
            Some(p) => Self::dialect_file(&p),
            None if name == "dep" => Ok(Dialect::shipped_dep()),
            None => Ok(Dialect::shipped_ptb()),
        }
    }

    pub fn dcs(&self, explicit: Option<&Path>, name: &str, registry: &Registry) -> Result<Dcs> {
        match self.pick(explicit, &format!("{name}.dcs.toml")) {
            Some(p) => Dcs::from_toml(&read(&p, "DCS")?, registry).with_context(|| format!("in DCS {}", p.display())),
            None if name == "dep" => Ok(Dcs::shipped_dep(registry)?),
            None => Ok(Dcs::shipped_ptb(registry)?),
        }
    }
}

/// Flag value, else config value.
pub fn layered<T: Clone>(flag: Option<T>, config: &Option<T>) -> Option<T> {
    flag.or_else(|| config.clone())
}

pub fn require_dialect(path: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    match path {
        Some(p) => Ok(p),
        None => bail!("{what} needs a dialect file (--dialect or `dialect` in the config)"),
    }
}
