//! Experiment configuration.
//!
//! Configurations are flat `key=value` text: whitespace- or
//! newline-separated pairs, `#` starts a comment.
//!
//! ```text
//! family=burr b=2 v=3 w=1     # or family=burr:b=2,v=3,w=1
//! lambda=0.5 mu=1             # mu=inf drops retrials
//! order=4096 jmax=2000 j=500,1000,2000
//! horizon=1e7 warmup=1e6 batches=32 seed=7
//! law=l_mu out=tail.csv
//! ```
//!
//! Family parameters: `hall_weiss` takes `v w`, `burr` takes `b v w`,
//! `student_t` takes `v`, `exponential` takes `nu`. Every CSV written by the
//! front end starts with `# manifest: {...}`, the configuration as JSON;
//! such a file is itself accepted as a configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dist::{Family, ServiceModel};
use crate::error::{Error, Result};
use crate::simulator::SimConfig;
use crate::transforms::{QueueModel, RetrialRate};

pub const MANIFEST_PREFIX: &str = "# manifest: ";

/// Which stationary law a pmf command reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    LMu,
    LInfinity,
    RMu,
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l_mu" => Ok(Law::LMu),
            "l_infinity" | "l_inf" => Ok(Law::LInfinity),
            "r_mu" => Ok(Law::RMu),
            _ => Err(Error::Config(format!("unknown law {s:?} (expected l_mu, l_infinity or r_mu)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub family: Family,
    pub lambda: f64,
    #[serde(with = "mu_text")]
    pub mu: RetrialRate,
    /// Series truncation order.
    pub order: usize,
    /// Largest index of tables and pmfs.
    pub jmax: usize,
    /// Explicit index grid; log-spaced up to `jmax` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<Vec<u64>>,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<f64>,
    pub batches: usize,
    pub seed: u64,
    pub law: Law,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: Family::Burr { b: 2.0, v: 3.0, w: 1.0 },
            lambda: 0.5,
            mu: RetrialRate::Finite(1.0),
            order: 4096,
            jmax: 1000,
            j: None,
            horizon: 1e6,
            warmup: None,
            batches: 32,
            seed: 1,
            law: Law::LMu,
            out: None,
        }
    }
}

mod mu_text {
    use super::*;

    pub fn serialize<S: Serializer>(mu: &RetrialRate, s: S) -> std::result::Result<S::Ok, S::Error> {
        match mu {
            RetrialRate::Finite(m) => s.serialize_f64(*m),
            RetrialRate::Infinite => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<RetrialRate, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(m) => Ok(RetrialRate::Finite(m)),
            Raw::Text(t) => parse_mu(&t).map_err(serde::de::Error::custom),
        }
    }
}

pub fn parse_mu(text: &str) -> Result<RetrialRate> {
    match text.trim() {
        "inf" | "infinity" | "Inf" => Ok(RetrialRate::Infinite),
        t => t.parse::<f64>().map(RetrialRate::Finite).map_err(|_| Error::Config(format!("bad mu {t:?}"))),
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

/// Builds a family from its name and named parameters.
pub fn family_from_parts(name: &str, params: &BTreeMap<String, String>) -> Result<Family> {
    let get = |k: &str| -> Result<f64> {
        let v = params.get(k).ok_or_else(|| Error::Config(format!("family {name} needs parameter {k}")))?;
        number(k, v)
    };
    let allowed: &[&str] = match name {
        "hall_weiss" => &["v", "w"],
        "burr" => &["b", "v", "w"],
        "student_t" => &["v"],
        "exponential" => &["nu"],
        _ => return Err(Error::Config(format!("unknown family {name:?}"))),
    };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Config(format!("family {name} has no parameter {extra}")));
    }
    Ok(match name {
        "hall_weiss" => Family::HallWeiss { v: get("v")?, w: get("w")? },
        "burr" => Family::Burr { b: get("b")?, v: get("v")?, w: get("w")? },
        "student_t" => Family::StudentT { v: get("v")? },
        _ => Family::Exponential { nu: get("nu")? },
    })
}

/// Parses `name:k=v,k=v`, e.g. `burr:b=2,v=3,w=1`.
pub fn parse_family_spec(spec: &str) -> Result<Family> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = BTreeMap::new();
    for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value in family spec, got {pair:?}")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    family_from_parts(name.trim(), &params)
}

const FAMILY_KEYS: [&str; 4] = ["b", "v", "w", "nu"];

impl ExperimentConfig {
    /// Parses `key=value` text, starting from the defaults.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut family_name: Option<String> = None;
        let mut family_params = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for token in line.split_whitespace() {
                let (key, value) = token
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("expected key=value, got {token:?}")))?;
                if key == "family" {
                    family_name = Some(value.to_string());
                } else if FAMILY_KEYS.contains(&key) {
                    family_params.insert(key.to_string(), value.to_string());
                } else {
                    cfg.set(key, value)?;
                }
            }
        }
        match family_name {
            Some(name) if name.contains(':') => {
                if !family_params.is_empty() {
                    return Err(Error::Config("family parameters given twice".into()));
                }
                cfg.family = parse_family_spec(&name)?;
            }
            Some(name) => cfg.family = family_from_parts(&name, &family_params)?,
            None if !family_params.is_empty() => {
                return Err(Error::Config("family parameters given without family=".into()));
            }
            None => {}
        }
        Ok(cfg)
    }

    /// Sets one non-family key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "lambda" => self.lambda = number(key, value)?,
            "mu" => self.mu = parse_mu(value)?,
            "order" => self.order = number(key, value)?,
            "jmax" => self.jmax = number(key, value)?,
            "j" => {
                let grid = value.split(',').map(|x| number::<u64>(key, x)).collect::<Result<Vec<_>>>()?;
                self.j = Some(grid);
            }
            "horizon" => self.horizon = number(key, value)?,
            "warmup" => self.warmup = Some(number(key, value)?),
            "batches" => self.batches = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "law" => self.law = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "family" => self.family = parse_family_spec(value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad JSON config: {e}")))
    }

    /// Accepts `key=value` text, a JSON object, or a file whose first line
    /// is a manifest comment.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if let Some(rest) = trimmed.strip_prefix(MANIFEST_PREFIX.trim_end()) {
            return Self::from_json(rest.lines().next().unwrap_or(""));
        }
        if trimmed.starts_with('{') {
            return Self::from_json(trimmed);
        }
        Self::from_key_values(text)
    }

    pub fn manifest_line(&self) -> String {
        let json = serde_json::to_string(self).expect("configs serialize");
        format!("{MANIFEST_PREFIX}{json}")
    }

    pub fn service(&self) -> Result<ServiceModel> {
        ServiceModel::new(self.family)
    }

    /// The queue model, with the stability condition checked.
    pub fn model(&self) -> Result<QueueModel> {
        QueueModel::new(self.lambda, self.mu, self.service()?)
    }

    pub fn sim_config(&self) -> SimConfig {
        let mut c = SimConfig::new(self.horizon, self.seed).with_batches(self.batches).with_max_state(self.jmax);
        if let Some(w) = self.warmup {
            c = c.with_warmup(w);
        }
        c
    }

    /// The explicit grid, or about four points per decade from 10 to
    /// `jmax`.
    pub fn j_grid(&self) -> Vec<u64> {
        match &self.j {
            Some(g) => g.clone(),
            None => log_grid(10, self.jmax as u64, 4),
        }
    }

    /// Checks everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<QueueModel> {
        let model = self.model()?;
        if self.order < 2 {
            return Err(Error::Config(format!("order must be at least 2, got {}", self.order)));
        }
        if self.j.as_ref().is_some_and(|g| g.is_empty() || g.contains(&0)) {
            return Err(Error::Config("j grid must be non-empty and positive".into()));
        }
        Ok(model)
    }
}

/// Distinct integers spaced evenly in `log` from `lo` to `hi`, both
/// included.
pub fn log_grid(lo: u64, hi: u64, per_decade: usize) -> Vec<u64> {
    if hi <= lo {
        return vec![hi.max(1)];
    }
    let decades = (hi as f64 / lo as f64).log10();
    let steps = ((decades * per_decade as f64).ceil() as usize).max(1);
    let mut grid: Vec<u64> = (0..=steps)
        .map(|i| (lo as f64 * (hi as f64 / lo as f64).powf(i as f64 / steps as f64)).round() as u64)
        .collect();
    grid.dedup();
    grid
}
