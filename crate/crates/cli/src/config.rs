//! Experiment configuration: TOML by default, JSON when the file ends in
//! `.json`.

use std::path::{Path, PathBuf};

use ladderlab::dist::{make_builtin_dist, DistSpec, TailSpec};
use ladderlab::growth::GrowthFunction;
use ladderlab::walk::DEFAULT_STEP_CAP;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Bumped whenever the meaning of a config field changes.
const HASH_DOMAIN: &str = "ladderlab-config-v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which increment law the walk is driven by.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    #[default]
    Base,
    Tilde,
    Truncated,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySettings {
    #[serde(default = "default_dominance_n")]
    pub dominance_n: u64,
    /// Excursions for the maximum-tail ratio; defaults to `n_samples`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prop3_n: Option<u64>,
    /// `[lo, hi, points]` of the log-spaced exceedance grid.
    #[serde(default = "default_prop3_grid")]
    pub prop3_grid: [f64; 3],
    #[serde(default = "default_delta_tol")]
    pub delta_tol: f64,
    /// Prefix sizes for the finiteness heuristic; defaults to `n/64, n/16, n/4, n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefixes: Option<Vec<usize>>,
}

fn default_dominance_n() -> u64 {
    1_000_000
}
fn default_prop3_grid() -> [f64; 3] {
    [1.0, 1e4, 41.0]
}
fn default_delta_tol() -> f64 {
    0.25
}
fn default_step_cap() -> u64 {
    DEFAULT_STEP_CAP
}
fn default_streams() -> usize {
    1
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            dominance_n: default_dominance_n(),
            prop3_n: None,
            prop3_grid: default_prop3_grid(),
            delta_tol: default_delta_tol(),
            prefixes: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub growth: GrowthFunction,
    pub increments: DistSpec,
    pub eps: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub n_samples: u64,
    #[serde(default = "default_step_cap")]
    pub step_cap: u64,
    pub seed: u64,
    /// Worker count. Results do not depend on it.
    #[serde(default = "default_streams")]
    pub streams: usize,
    #[serde(default)]
    pub law: Law,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunc_margin: Option<f64>,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentConfig {
    pub fn from_str(text: &str, json: bool) -> Result<Self, CliError> {
        if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::from_str(&text, json)
    }

    /// SHA-256 over the canonical JSON of every field that changes results.
    /// Worker count and output locations are excluded.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("streams");
            m.remove("outputs");
        }
        let mut h = Sha256::new();
        h.update(HASH_DOMAIN.as_bytes());
        h.update([0u8]);
        h.update(v.to_string().as_bytes());
        hex::encode(h.finalize())
    }

    pub fn growth(&self) -> Result<GrowthFunction, CliError> {
        self.growth
            .clone()
            .validated()
            .map_err(|e| CliError::Config(format!("growth: {e}")))
    }

    pub fn base(&self) -> Result<TailSpec, CliError> {
        make_builtin_dist(&self.increments).map_err(|e| CliError::Config(format!("increments: {e}")))
    }

    /// `a = -E xi` of the configured increments.
    pub fn drift(&self) -> Result<f64, CliError> {
        let base = self.base()?;
        base.require_negative_mean()
            .map(|m| -m)
            .map_err(|e| CliError::Config(format!("increments: {e}")))
    }

    /// Every invariant that does not need the construction.
    pub fn validate(&self) -> Result<f64, CliError> {
        self.growth()?;
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps = {} must lie in (0, 1)", self.eps));
        }
        if self.n_samples < 1 {
            return bad("n_samples must be >= 1".into());
        }
        if self.streams < 1 {
            return bad("streams must be >= 1".into());
        }
        if self.step_cap < 1 {
            return bad("step_cap must be >= 1".into());
        }
        if self.alpha.is_some_and(|a| !(a > 0.0 && a.is_finite())) {
            return bad("alpha must be positive".into());
        }
        if self.c.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
            return bad("c must be positive".into());
        }
        if self.trunc_margin.is_some_and(|m| !(m > 0.0)) {
            return bad("trunc_margin must be positive".into());
        }
        let v = &self.verify;
        let [lo, hi, pts] = v.prop3_grid;
        if !(lo > 0.0 && hi > lo && pts >= 2.0 && pts.fract() == 0.0) {
            return bad("verify.prop3_grid must be [lo > 0, hi > lo, points >= 2]".into());
        }
        if !(v.delta_tol > 0.0) {
            return bad("verify.delta_tol must be positive".into());
        }
        if v.prop3_n == Some(0) {
            return bad("verify.prop3_n must be >= 1".into());
        }
        if let Some(p) = &v.prefixes {
            if p.iter().any(|&n| n == 0 || n as u64 > self.n_samples) {
                return bad("verify.prefixes must lie in [1, n_samples]".into());
            }
        }
        let a = self.drift()?;
        if !(self.delta > 0.0 && self.delta < a) {
            return bad(format!("delta = {} must lie in (0, a = {a})", self.delta));
        }
        Ok(a)
    }

    /// Prefix sizes for stability curves.
    pub fn prefixes(&self) -> Vec<usize> {
        if let Some(p) = &self.verify.prefixes {
            return p.clone();
        }
        let n = self.n_samples as usize;
        let mut out: Vec<usize> = [64, 16, 4, 1].iter().map(|d| n / d).filter(|&k| k > 0).collect();
        out.dedup();
        out
    }
}
