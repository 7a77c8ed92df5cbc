//! Flat key-value scenario files.
//!
//! One `key = value` pair per line, `#` comments, keys case-sensitive.
//! Numbers stay decimal strings until a suite consumes them, so a
//! scenario file plus a seed fully determines every artifact byte.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use betamix::field::{NoiseLaw, NoiseSpec, ProcessConfig};
use betamix::sequence::{LevelSequence, RateBudget};

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub suite: String,
    keys: BTreeMap<String, String>,
}

impl Scenario {
    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read scenario {}", path.display()))?;
        Self::parse_str(&text).with_context(|| format!("in scenario {}", path.display()))
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut keys = BTreeMap::new();
        for (ix, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {line:?}", ix + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                bail!("line {}: empty key", ix + 1);
            }
            if keys.insert(key.to_string(), value.to_string()).is_some() {
                bail!("line {}: duplicate key {key:?}", ix + 1);
            }
        }
        let name = keys
            .get("name")
            .ok_or_else(|| anyhow!("missing required key `name`"))?
            .clone();
        let suite = keys.get("suite").cloned().unwrap_or_else(|| "all".into());
        Ok(Scenario { name, suite, keys })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.keys.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| anyhow!("missing required key `{key}`"))
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .with_context(|| format!("key `{key}`: expected an integer, got {v:?}")),
        }
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .with_context(|| format!("key `{key}`: expected a number, got {v:?}")),
        }
    }

    pub fn get_list_u64(&self, key: &str, default: &[u64]) -> Result<Vec<u64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => parse_u64_list(v)
                .with_context(|| format!("key `{key}`: bad integer list {v:?}")),
        }
    }

    pub fn get_list_f64(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .with_context(|| format!("key `{key}`: bad number {p:?}"))
                })
                .collect(),
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.require("seed")?
            .parse()
            .context("key `seed`: expected an integer")
    }

    /// Build the process configuration shared by the simulation suites.
    pub fn process_config(&self) -> Result<ProcessConfig> {
        let seq = parse_sequence(
            self.require("sequence")?,
            self.get_u64("levels", 0)? as usize,
        )?;
        let report = seq.validate();
        if !report.first_level_ok || !report.doubling_everywhere {
            bail!(
                "sequence fails validation: {}",
                report.failures().join("; ")
            );
        }
        let truncation = self.get_u64("truncation", seq.len() as u64)? as usize;
        let noise = match self.get("noise").unwrap_or("gaussian") {
            "gaussian" => NoiseSpec {
                law: NoiseLaw::Gaussian,
                stream: 0,
            },
            "rademacher" => NoiseSpec {
                law: NoiseLaw::Rademacher,
                stream: 0,
            },
            other => bail!("key `noise`: unknown law {other:?}"),
        };
        ProcessConfig::new(seq, truncation, noise, self.seed()?)
            .map_err(|e| anyhow!("invalid process configuration: {e}"))
    }
}

/// `lo..hi` (inclusive) or a comma list.
pub fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().context("range start")?;
        let hi: u64 = hi.trim().parse().context("range end")?;
        if lo > hi {
            bail!("empty range {lo}..{hi}");
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| anyhow!("{e}: {p:?}")))
        .collect()
}

/// `explicit:2,64,65600` | `delta:0.1` | `adaptive:inv-linear` (and the
/// other rate rules); delta and adaptive take the level count from
/// `levels`.
pub fn parse_sequence(spec: &str, levels: usize) -> Result<LevelSequence> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("sequence spec {spec:?} needs the form kind:argument"))?;
    let seq = match kind {
        "explicit" => {
            let levels = parse_u64_list(arg).context("explicit sequence levels")?;
            LevelSequence::explicit(levels)
        }
        "delta" => {
            if levels == 0 {
                bail!("delta sequences need `levels`");
            }
            LevelSequence::delta_rule(arg, levels)
        }
        "adaptive" => {
            if levels == 0 {
                bail!("adaptive sequences need `levels`");
            }
            let budget: RateBudget = arg.parse().map_err(|e| anyhow!("{e}"))?;
            LevelSequence::adaptive(budget, levels, true)
        }
        other => bail!("unknown sequence kind {other:?}"),
    };
    seq.map_err(|e| anyhow!("cannot build sequence {spec:?}: {e}"))
}
