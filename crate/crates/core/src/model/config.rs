//! JSON definition files for kernels and families.
//!
//! ```json
//! {
//!   "n": 1,
//!   "kernel": {"kind": "expr", "expr": "chi(0,1)(u)", "support": "full"},
//!   "family": {"a": ["u"], "b": {"1,1": ["exp(t)"]}, "jac": {"1,1": "exp(t)"},
//!              "positive_definite": true}
//! }
//! ```
//!
//! `kernel.kind` is `expr`, `preset` (with `preset` and optional `alpha`) or
//! `tabulated` (with a CSV `path`, relative to the file). `family` is either
//! `{"preset": name}` or the explicit form above, optionally with a
//! `conjugator` matrix; it may be omitted for preset kernels. `support` is
//! `"full"`, `{"octants": [..]}` or `{"box": [[lo, hi], ..]}` with `null`
//! for an infinite end.

use super::expr::Expr;
use super::family::{InverseMap, MatrixFamily};
use super::kernel::{KernelSpec, Support};
use super::presets;
use crate::error::{Error, Result};
use crate::grid::read_csv;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub kernel: KernelConfig,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelConfig {
    Expr {
        expr: String,
        #[serde(default)]
        support: Option<SupportConfig>,
    },
    Preset {
        preset: String,
        #[serde(default)]
        alpha: Option<f64>,
    },
    Tabulated {
        path: String,
        #[serde(default)]
        support: Option<SupportConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SupportConfig {
    Named(String),
    Octants { octants: Vec<usize> },
    Box {
        #[serde(rename = "box")]
        bounds: Vec<(Option<f64>, Option<f64>)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyConfig {
    Preset { preset: String },
    Explicit(ExplicitFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitFamily {
    pub a: Vec<String>,
    pub b: BTreeMap<String, Vec<String>>,
    pub jac: BTreeMap<String, String>,
    pub positive_definite: bool,
    #[serde(default)]
    pub conjugator: Option<Vec<Vec<f64>>>,
}

impl SupportConfig {
    fn build(&self) -> Result<Support> {
        match self {
            SupportConfig::Named(s) if s == "full" => Ok(Support::Full),
            SupportConfig::Named(s) => Err(Error::Config(format!("unknown support '{s}'"))),
            SupportConfig::Octants { octants } => Ok(Support::Octants(octants.clone())),
            SupportConfig::Box { bounds } => Ok(Support::Box(
                bounds
                    .iter()
                    .map(|(lo, hi)| (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
                    .collect(),
            )),
        }
    }
}

fn parse_pair(key: &str) -> Result<(usize, usize)> {
    let mut it = key.split(',').map(|s| s.trim().parse::<usize>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(i)), Some(Ok(j)), None) => Ok((i, j)),
        _ => Err(Error::Config(format!("octant pair key '{key}' is not of the form \"i,j\""))),
    }
}

impl FamilyConfig {
    pub fn build(&self, n: usize) -> Result<MatrixFamily> {
        let family = match self {
            FamilyConfig::Preset { preset } => presets::family_preset(preset)?,
            FamilyConfig::Explicit(e) => {
                let a = e.a.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>>>()?;
                let mut maps = BTreeMap::new();
                for (key, b) in &e.b {
                    let pair = parse_pair(key)?;
                    let jac = e
                        .jac
                        .get(key)
                        .ok_or_else(|| Error::Config(format!("no Jacobian for pair \"{key}\"")))?;
                    maps.insert(
                        pair,
                        InverseMap {
                            b: b.iter().map(|s| Expr::parse(s)).collect::<Result<_>>()?,
                            jacobian: Expr::parse(jac)?,
                        },
                    );
                }
                if let Some(extra) = e.jac.keys().find(|k| !e.b.contains_key(*k)) {
                    return Err(Error::Config(format!("Jacobian for pair \"{extra}\" without an inverse map")));
                }
                let f = MatrixFamily::new(n, a, maps, e.positive_definite)?;
                match &e.conjugator {
                    Some(c) => f.with_conjugator(c.clone())?,
                    None => f,
                }
            }
        };
        if family.dim() != n {
            return Err(Error::Config(format!("family of dimension {} in a config with n = {n}", family.dim())));
        }
        family.validate(&[])?;
        Ok(family)
    }
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the kernel and family; relative CSV paths resolve against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<(KernelSpec, MatrixFamily)> {
        if !(1..=2).contains(&self.n) {
            return Err(Error::Config(format!("n must be 1 or 2, got {}", self.n)));
        }
        let support = |s: &Option<SupportConfig>| s.as_ref().map_or(Ok(Support::Full), SupportConfig::build);
        let (kernel, default_family) = match &self.kernel {
            KernelConfig::Expr { expr, support: s } => {
                (KernelSpec::parse(self.n, expr, support(s)?)?, None)
            }
            KernelConfig::Preset { preset, alpha } => {
                let (k, f) = presets::preset(preset, *alpha)?;
                (k, Some(f))
            }
            KernelConfig::Tabulated { path, support: s } => {
                let p = Path::new(path);
                let p = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.to_path_buf(),
                };
                let f = read_csv(&p)?;
                let k = KernelSpec::tabulated(f, support(s)?)?.with_label(path.clone());
                (k, None)
            }
        };
        if kernel.dim() != self.n {
            return Err(Error::Config(format!("kernel of dimension {} in a config with n = {}", kernel.dim(), self.n)));
        }
        let family = match (&self.family, default_family) {
            (Some(fc), _) => fc.build(self.n)?,
            (None, Some(f)) => f,
            (None, None) => return Err(Error::Config("a family is required for non-preset kernels".into())),
        };
        Ok((kernel, family))
    }
}

/// Reads and builds a definition file.
pub fn load_model(path: impl AsRef<Path>) -> Result<(KernelSpec, MatrixFamily)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    ModelConfig::from_json(&text)?.build(path.parent())
}
