//! Experiment configuration: JSON or TOML, canonicalized for hashing.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use tep_core::decoder::Policy;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("cannot parse {0}: {1}")]
    Parse(PathBuf, String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("ensemble file error: {0}")]
    Ensemble(#[from] tep_core::ensemble::EnsembleError),
}

/// Experiment modes, one per subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Evolve,
    Threshold,
    Scaling,
    Urn,
    Gamma,
    Compare,
}

fn default_decoders() -> Vec<String> {
    vec!["bp".into(), "tep".into()]
}

fn default_trials() -> u64 {
    1000
}

fn default_policy() -> String {
    "degree-one-first".into()
}

fn default_sample_trajectories() -> usize {
    20
}

fn default_delta_probe_n() -> usize {
    tep_core::scaling::DEFAULT_DELTA_PROBE_N
}

fn default_delta_trials() -> u64 {
    tep_core::scaling::DEFAULT_DELTA_TRIALS
}

fn default_gamma_n() -> Vec<usize> {
    vec![1 << 12, 1 << 14, 1 << 16]
}

fn default_urn_balls() -> Vec<u64> {
    vec![100, 1000, 10_000]
}

fn default_urn_fraction() -> f64 {
    0.9
}

/// Declarative experiment description. `eps` entries must lie in [0, 1],
/// `trials >= 1`, and the master seed is explicit: no wall-clock seeding.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Path to the ensemble spec JSON, relative to the config file.
    pub ensemble: String,
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Code lengths; empty means the ensemble file's `n`.
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_decoders")]
    pub decoders: Vec<String>,
    #[serde(default = "default_policy")]
    pub policy: String,
    pub seed: u64,
    /// Output directory; created if missing.
    #[serde(default)]
    pub out: Option<String>,
    /// Trajectory stride (0 = every iteration up to 2^14, then every 16th).
    #[serde(default)]
    pub stride: usize,
    #[serde(default = "default_sample_trajectories")]
    pub sample_trajectories: usize,
    #[serde(default = "default_delta_probe_n")]
    pub delta_probe_n: usize,
    /// Trials for the variance estimate; 0 requests the paper-constant
    /// fallback via `delta_paper`.
    #[serde(default = "default_delta_trials")]
    pub delta_trials: u64,
    /// Fallback variance coefficient used when `delta_trials` is 0.
    #[serde(default)]
    pub delta_paper: Option<f64>,
    #[serde(default = "default_gamma_n")]
    pub gamma_n: Vec<usize>,
    #[serde(default = "default_urn_balls")]
    pub urn_balls: Vec<u64>,
    #[serde(default = "default_urn_fraction")]
    pub urn_fraction: f64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| ConfigError::Parse(path.into(), e.to_string()))?
        } else {
            serde_json::from_str(&text)
                .map_err(|e| ConfigError::Parse(path.into(), e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for &e in &self.eps {
            if !(0.0..=1.0).contains(&e) {
                return Err(ConfigError::Invalid(format!("eps {e} outside [0, 1]")));
            }
        }
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be >= 1".into()));
        }
        if self.decoders.is_empty() {
            return Err(ConfigError::Invalid("decoders list is empty".into()));
        }
        for d in &self.decoders {
            if d != "bp" && d != "tep" {
                return Err(ConfigError::Invalid(format!("unknown decoder {d:?}")));
            }
        }
        parse_policy(&self.policy)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown policy {:?}", self.policy)))?;
        if !(0.0..=1.0).contains(&self.urn_fraction) {
            return Err(ConfigError::Invalid("urn_fraction outside [0, 1]".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical (sorted-key JSON) form, first 16 hex chars.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canon = serde_json::to_string(&value).expect("canonical form");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        let digest = h.finalize();
        let mut out = String::with_capacity(16);
        for b in &digest[..8] {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Resolves the ensemble path relative to the config file location.
    pub fn ensemble_path(&self, config_path: &Path) -> PathBuf {
        let p = Path::new(&self.ensemble);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            config_path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(p)
        }
    }
}

pub fn parse_policy(name: &str) -> Option<Policy> {
    match name {
        "degree-one-first" => Some(Policy::DegreeOneFirst),
        "fifo-mixed" => Some(Policy::FifoMixed),
        "random" => Some(Policy::Random),
        "bp-then-deg2-phases" => Some(Policy::BpThenDeg2Phases),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> String {
        r#"{"mode": "simulate", "ensemble": "ens.json", "eps": [0.4], "seed": 7}"#.into()
    }

    #[test]
    fn parses_minimal_json() {
        let cfg: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.trials, 1000);
        assert_eq!(cfg.decoders, vec!["bp", "tep"]);
    }

    #[test]
    fn parses_toml() {
        let cfg: ExperimentConfig = toml::from_str(
            "mode = \"evolve\"\nensemble = \"e.json\"\neps = [0.415]\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Evolve);
    }

    #[test]
    fn hash_ignores_key_order() {
        let a: ExperimentConfig = serde_json::from_str(
            r#"{"mode": "simulate", "ensemble": "e", "eps": [0.4], "seed": 7}"#,
        )
        .unwrap();
        let b: ExperimentConfig = serde_json::from_str(
            r#"{"seed": 7, "eps": [0.4], "ensemble": "e", "mode": "simulate"}"#,
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn hash_changes_with_content() {
        let a: ExperimentConfig = serde_json::from_str(
            r#"{"mode": "simulate", "ensemble": "e", "eps": [0.4], "seed": 7}"#,
        )
        .unwrap();
        let mut b = a.clone();
        b.seed = 8;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn rejects_bad_eps() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"mode": "simulate", "ensemble": "e", "eps": [1.5], "seed": 7}"#,
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_unknown_fields() {
        let r: Result<ExperimentConfig, _> = serde_json::from_str(
            r#"{"mode": "simulate", "ensemble": "e", "seed": 7, "bogus": 1}"#,
        );
        assert!(r.is_err());
    }
}
