//! Experiment configuration files.
//!
//! The format is TOML with four sections:
//!
//! ```toml
//! [dgp]
//! regime = "mild"
//! zeta = 2.0
//! p = 1.0
//! c_nu = 0.3
//!
//! [experiment]
//! sample_sizes = [500, 1000, 2000]
//! replications = 200
//! master_seed = 7
//! estimators = ["loo_optimal_j", "plugin"]
//! family = "cosine"
//!
//! [tuning]
//! c0 = 0.5
//! C0 = 1.0
//! scale = 1.0
//!
//! [run]
//! threads = 0
//! timing = false
//! ```
//!
//! Only `[dgp]` and `[experiment]` are required.

use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::dgp::DgpParams;
use crate::error::{Error, Result};
use crate::experiments::{EstimatorKind, ExperimentConfig};

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dgp: DgpParams,
    experiment: RawExperiment,
    #[serde(default)]
    tuning: RawTuning,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    sample_sizes: Vec<usize>,
    replications: usize,
    #[serde(default = "default_seed")]
    master_seed: u64,
    #[serde(default = "default_estimators")]
    estimators: Vec<String>,
    #[serde(default = "default_family")]
    family: String,
}

fn default_seed() -> u64 {
    20_240_601
}
fn default_estimators() -> Vec<String> {
    vec!["loo_optimal_j".to_string()]
}
fn default_family() -> String {
    "cosine".to_string()
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTuning {
    #[serde(default = "default_c0")]
    c0: f64,
    #[serde(rename = "C0", default = "default_big_c0")]
    big_c0: f64,
    #[serde(default = "default_scale")]
    scale: f64,
}

impl Default for RawTuning {
    fn default() -> Self {
        Self {
            c0: default_c0(),
            big_c0: default_big_c0(),
            scale: default_scale(),
        }
    }
}

fn default_c0() -> f64 {
    crate::lepski::DEFAULT_C0
}
fn default_big_c0() -> f64 {
    crate::lepski::DEFAULT_ORACLE_C0
}
fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default)]
    threads: usize,
    #[serde(default)]
    timing: bool,
}

/// Finds the `section.key` path for the byte offset of a TOML error.
fn key_at(text: &str, offset: usize) -> String {
    let mut section = String::new();
    let mut key = String::new();
    let mut pos = 0;
    for line in text.lines() {
        let trimmed = line.trim();
        if pos > offset {
            break;
        }
        if trimmed.starts_with('[') && !trimmed.starts_with("[[") {
            section = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = trimmed.split_once('=') {
            key = k.trim().to_string();
        }
        pos += line.len() + 1;
    }
    match (section.is_empty(), key.is_empty()) {
        (true, true) => "<root>".to_string(),
        (true, false) => key,
        (false, true) => section,
        (false, false) => format!("{section}.{key}"),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let key = e
            .span()
            .map(|s| key_at(text, s.start))
            .unwrap_or_else(|| "<root>".to_string());
        Error::config(key, e.message().to_string())
    })?;
    let estimators = raw
        .experiment
        .estimators
        .iter()
        .map(|s| EstimatorKind::parse(s))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::config("experiment.estimators", e.to_string()))?;
    let family = BasisFamily::parse(&raw.experiment.family)
        .map_err(|e| Error::config("experiment.family", e.to_string()))?;
    let config = ExperimentConfig {
        dgp: raw.dgp,
        sample_sizes: raw.experiment.sample_sizes,
        replications: raw.experiment.replications,
        master_seed: raw.experiment.master_seed,
        estimators,
        c0: raw.tuning.c0,
        big_c0: raw.tuning.big_c0,
        scale: raw.tuning.scale,
        family,
        threads: raw.run.threads,
        timing: raw.run.timing,
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Renders a configuration back to TOML; `parse_config` reads it unchanged.
pub fn render_config(config: &ExperimentConfig) -> Result<String> {
    let raw = RawConfig {
        dgp: config.dgp.clone(),
        experiment: RawExperiment {
            sample_sizes: config.sample_sizes.clone(),
            replications: config.replications,
            master_seed: config.master_seed,
            estimators: config
                .estimators
                .iter()
                .map(|e| e.name().to_string())
                .collect(),
            family: config.family.name(),
        },
        tuning: RawTuning {
            c0: config.c0,
            big_c0: config.big_c0,
            scale: config.scale,
        },
        run: RawRun {
            threads: config.threads,
            timing: config.timing,
        },
    };
    toml::to_string(&raw).map_err(|e| Error::Numeric(format!("serializing config: {e}")))
}
