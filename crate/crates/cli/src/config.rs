//! TOML configuration files. Every key mirrors a command-line flag; flags
//! win over the file, and the file wins over a preset.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,
    pub refs: Option<PathBuf>,
    pub scale: Option<String>,
    pub name: Option<String>,

    pub model: Option<String>,
    pub n: Option<Sizes>,
    pub p_grid: Option<String>,
    pub rho_grid: Option<String>,
    pub realizations: Option<usize>,
    pub ratios: Option<u64>,
    pub seed: Option<u64>,
    pub stats: Option<Vec<String>>,

    pub p: Option<f64>,
    pub rho: Option<f64>,
    pub target_rbar: Option<f64>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub family: Option<String>,
    pub bracket: Option<String>,
    pub bins: Option<usize>,
    pub lmin_bins: Option<usize>,
    pub lmin_max: Option<f64>,
}

/// `n = 100` or `n = [100, 200]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Sizes {
    One(usize),
    Many(Vec<usize>),
}

impl Sizes {
    pub fn into_vec(self) -> Vec<usize> {
        match self {
            Sizes::One(n) => vec![n],
            Sizes::Many(v) => v,
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }
}
