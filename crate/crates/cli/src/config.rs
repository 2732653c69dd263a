//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use fahs::twogroups::NullMode;
use fahs::ProcedureConfig;

/// Documented keys of one subcommand.
pub type KeyTable = &'static [(&'static str, &'static str)];

#[derive(Debug, Default, Clone)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    /// Parses `key = value` lines. `#` starts a comment; blank lines are
    /// skipped; a key may appear once.
    pub fn parse(text: &str, allowed: KeyTable) -> Result<Self> {
        let mut out = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", i + 1))?;
            let key = k.trim().to_string();
            check_key(&key, allowed).with_context(|| format!("config line {}", i + 1))?;
            if out.entries.insert(key.clone(), v.trim().to_string()).is_some() {
                bail!("config line {}: duplicate key `{key}`", i + 1);
            }
        }
        Ok(out)
    }

    pub fn read(path: &Path, allowed: KeyTable) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, allowed).with_context(|| format!("in {}", path.display()))
    }

    /// Later values win.
    pub fn set(&mut self, key: &str, value: impl Into<String>, allowed: KeyTable) -> Result<()> {
        check_key(key, allowed)?;
        self.entries.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Applies `KEY=VALUE` overrides.
    pub fn apply_overrides(&mut self, pairs: &[String], allowed: KeyTable) -> Result<()> {
        for p in pairs {
            let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("override `{p}` is not KEY=VALUE"))?;
            self.set(k.trim(), v.trim(), allowed)?;
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<V>().map_err(|e| anyhow!("bad value `{v}` for `{key}`: {e}")))
            .transpose()
    }

    pub fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V>
    where
        V::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<V: FromStr>(&self, key: &str) -> Result<Option<Vec<V>>>
    where
        V::Err: std::fmt::Display,
    {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let items = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<V>().map_err(|e| anyhow!("bad item `{s}` in `{key}`: {e}")))
            .collect::<Result<Vec<V>>>()?;
        if items.is_empty() {
            bail!("`{key}` is empty");
        }
        Ok(Some(items))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(v) => bail!("bad value `{v}` for `{key}`: expected true or false"),
        }
    }
}

fn check_key(key: &str, allowed: KeyTable) -> Result<()> {
    if allowed.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        let known: Vec<&str> = allowed.iter().map(|(k, _)| *k).collect();
        bail!("unknown key `{key}` (known keys: {})", known.join(", "))
    }
}

pub fn procedure_config(kv: &KeyValues) -> Result<ProcedureConfig> {
    let d = ProcedureConfig::default();
    let cfg = ProcedureConfig {
        burn_in: kv.get_or("burn_in", d.burn_in)?,
        samples: kv.get_or("samples", d.samples)?,
        bins: kv.get_or("bins", d.bins)?,
        df: kv.get_or("df", d.df)?,
        null_mode: kv.get_or::<NullMode>("null", d.null_mode)?,
    };
    if cfg.samples == 0 {
        bail!("samples must be at least 1");
    }
    if cfg.bins < 10 || cfg.df < 2 {
        bail!("bins must be at least 10 and df at least 2");
    }
    Ok(cfg)
}

pub fn threads(kv: &KeyValues) -> Result<usize> {
    let default = std::thread::available_parallelism().map_or(1, |n| n.get());
    let n = kv.get_or("threads", default)?;
    if n == 0 {
        bail!("threads must be at least 1");
    }
    Ok(n)
}

/// Help text listing every key.
pub fn key_help(allowed: KeyTable) -> String {
    let width = allowed.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Config keys (file lines `key = value`, or `--set key=value`):\n");
    for (k, doc) in allowed {
        s.push_str(&format!("  {k:<width$}  {doc}\n"));
    }
    s
}
