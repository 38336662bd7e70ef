//! Flat `key = value` scenario files.
//!
//! Blank lines and `#` comments are ignored, values may be quoted, lists are
//! comma separated (optionally wrapped in `[...]`). Keys of the form
//! `sweep.<key>` hold a list of values for `<key>`; [`RawConfig::expand`]
//! takes their cartesian product.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{CheckId, DiffeoConfig, DiffeoKind, GrowthConfig, ModulusConfig, OutputConfig, Scenario, Tolerances};
use crate::diffeo::Sign;
use crate::dynamics::GridSpec;
use crate::error::{Error, Result};

const KNOWN_KEYS: &[&str] = &[
    "name",
    "modulus.kind",
    "modulus.alpha",
    "modulus.scale",
    "modulus.domain_end",
    "modulus.path",
    "diffeo.kind",
    "diffeo.epsilon",
    "diffeo.sign",
    "diffeo.k_min",
    "diffeo.blocks",
    "growth.n_max",
    "growth.grid",
    "growth.refine",
    "growth.seed",
    "checks.list",
    "checks.thm6_epsilon",
    "checks.closure_partner",
    "tolerance.exponent_margin",
    "tolerance.stability_factor",
    "tolerance.oracle_rel",
    "tolerance.gamma_final",
    "output.path",
    "output.format",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
    pub sweeps: BTreeMap<String, Vec<String>>,
    /// Relative paths in the config (tabulated moduli) resolve against this.
    pub base_dir: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = k.trim().to_string();
            let value = unquote(v.trim()).to_string();
            if let Some(target) = key.strip_prefix("sweep.") {
                check_key(target)?;
                if target == "name" {
                    return Err(Error::Config("the scenario name cannot be swept".into()));
                }
                let values = split_list(&value);
                if values.is_empty() {
                    return Err(Error::Config(format!("sweep over '{target}' has no values")));
                }
                if cfg.sweeps.insert(target.to_string(), values).is_some() {
                    return Err(Error::Config(format!("duplicate key '{key}'")));
                }
            } else {
                check_key(&key)?;
                if cfg.entries.insert(key.clone(), value).is_some() {
                    return Err(Error::Config(format!("duplicate key '{key}'")));
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// One scenario per point of the sweep grid (a single one without sweeps).
    pub fn expand(&self) -> Result<Vec<Scenario>> {
        let mut points: Vec<Vec<(&str, &str)>> = vec![Vec::new()];
        for (key, values) in &self.sweeps {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push((key.as_str(), v.as_str()));
                        q
                    })
                })
                .collect();
        }
        points
            .into_iter()
            .map(|overrides| {
                let mut entries = self.entries.clone();
                for &(k, v) in &overrides {
                    entries.insert(k.to_string(), v.to_string());
                }
                let mut s = Scenario::from_entries(&entries, &self.base_dir)?;
                if !overrides.is_empty() {
                    let tag: Vec<String> = overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    s.name = format!("{}[{}]", s.name, tag.join(","));
                }
                Ok(s)
            })
            .collect()
    }
}

fn check_key(key: &str) -> Result<()> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown key '{key}'")))
    }
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(v)
}

pub(crate) fn split_list(v: &str) -> Vec<String> {
    let v = v.trim();
    let v = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .unwrap_or(v);
    v.split(',')
        .map(|s| unquote(s.trim()).to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Sorted `key = value` lines; the input to the config hash.
pub fn canonical_text(entries: &BTreeMap<String, String>) -> String {
    entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

pub fn config_hash(entries: &BTreeMap<String, String>) -> String {
    hex::encode(Sha256::digest(canonical_text(entries).as_bytes()))
}

struct Reader<'a> {
    entries: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.str(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("{key} = '{v}': {e}")))
            })
            .transpose()
    }

    fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }
}

impl Scenario {
    pub fn from_entries(entries: &BTreeMap<String, String>, base_dir: &Path) -> Result<Self> {
        for k in entries.keys() {
            check_key(k)?;
        }
        let r = Reader { entries };

        let modulus = ModulusConfig {
            kind: r.str("modulus.kind").unwrap_or("lipschitz").to_string(),
            alpha: r.parse("modulus.alpha")?,
            scale: r.or("modulus.scale", 1.0)?,
            domain_end: r.parse("modulus.domain_end")?,
            path: r.str("modulus.path").map(|p| base_dir.join(p)),
        };

        let kind: DiffeoKind = r.or("diffeo.kind", DiffeoKind::Identity)?;
        let blocks = match r.str("diffeo.blocks") {
            None => Vec::new(),
            Some(v) => parse_blocks(v)?,
        };
        let diffeo = DiffeoConfig {
            kind,
            epsilon: r.parse("diffeo.epsilon")?,
            sign: r.or("diffeo.sign", Sign::Contracting)?,
            k_min: r.or("diffeo.k_min", 32)?,
            blocks,
        };

        let defaults = GridSpec::default();
        let growth = GrowthConfig {
            n_max: r.or("growth.n_max", 1024)?,
            grid: GridSpec {
                base: r.or("growth.grid", defaults.base)?,
                refine: r.or("growth.refine", defaults.refine)?,
            },
            seed: r.or("growth.seed", 1)?,
        };

        let checks = match r.str("checks.list") {
            None => Vec::new(),
            Some(v) => split_list(v)
                .iter()
                .map(|c| c.parse())
                .collect::<Result<Vec<CheckId>>>()?,
        };
        let mut seen = std::collections::BTreeSet::new();
        for c in &checks {
            if !seen.insert(*c) {
                return Err(Error::Config(format!("check '{c}' listed twice")));
            }
        }

        let d = Tolerances::default();
        let tolerances = Tolerances {
            exponent_margin: r.or("tolerance.exponent_margin", d.exponent_margin)?,
            stability_factor: r.or("tolerance.stability_factor", d.stability_factor)?,
            oracle_rel: r.or("tolerance.oracle_rel", d.oracle_rel)?,
            gamma_final: r.or("tolerance.gamma_final", d.gamma_final)?,
        };

        let output = OutputConfig {
            path: r.str("output.path").map(PathBuf::from),
            format: r.or("output.format", super::OutputFormat::Text)?,
        };

        Ok(Scenario {
            name: r.str("name").unwrap_or("scenario").to_string(),
            modulus,
            diffeo,
            growth,
            checks,
            thm6_epsilon: r.or("checks.thm6_epsilon", 0.1)?,
            closure_partner: r.str("checks.closure_partner").unwrap_or("self").to_string(),
            tolerances,
            output,
            config_hash: config_hash(entries),
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Vec<Self>> {
        RawConfig::from_path(path)?.expand()
    }
}

/// Comma-separated `a:b:epsilon` triples, optionally bracketed.
pub fn parse_blocks(v: &str) -> Result<Vec<(f64, f64, f64)>> {
    split_list(v).iter().map(|b| parse_block(b)).collect()
}

fn parse_block(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |p: &str| -> Result<f64> {
        p.parse()
            .map_err(|e| Error::Config(format!("block '{s}': {e}")))
    };
    match parts.as_slice() {
        [a, b, e] => Ok((num(a)?, num(b)?, num(e)?)),
        _ => Err(Error::Config(format!("block '{s}' is not a:b:epsilon"))),
    }
}
