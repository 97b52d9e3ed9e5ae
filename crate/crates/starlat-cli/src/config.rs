//! Run configuration: a single TOML document covering the evaluation
//! pipeline, the optimizer, the design box and output plumbing. Every
//! field has a default that reproduces the reference setup, so a stock
//! run needs no configuration file at all. Precedence is flags over
//! file over defaults; `STARLAT_OUT` supplies the default output
//! directory.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use starlat_core::geometry::Bounds;
use starlat_core::homog::EvalConfig;
use starlat_core::mesh::SHEAR_CORRECTION;
use starlat_core::optim::OptConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub evaluation: EvalConfig,
    pub optimizer: OptConfig,
    pub bounds: Bounds,
    pub output: OutputConfig,
    pub validate: ValidateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            evaluation: EvalConfig::default(),
            optimizer: OptConfig::default(),
            bounds: Bounds::default(),
            output: OutputConfig::default(),
            validate: ValidateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Where artifact-producing commands write by default.
    pub directory: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        let directory = std::env::var_os("STARLAT_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        OutputConfig { directory }
    }
}

/// Knobs of the `validate` battery. The defaults are the stock values;
/// overriding them is how the battery's negative controls are driven
/// (a broken shear correction must make the cantilever check fail).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub shear_correction: f64,
    /// Factor applied to the weak material's stiffness in the drift check.
    pub weak_factor: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            shear_correction: SHEAR_CORRECTION,
            weak_factor: 10.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config file {}", p.display()))
            }
        }
    }

    /// The fully resolved configuration as a TOML document (what
    /// `--print-config` emits); feeding it back in is a no-op.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).context("serializing configuration")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.evaluation, cfg.evaluation);
        assert_eq!(back.optimizer, cfg.optimizer);
        assert_eq!(back.bounds.as_array(), cfg.bounds.as_array());
        assert_eq!(back.validate.shear_correction, cfg.validate.shear_correction);
    }

    #[test]
    fn partial_file_keeps_remaining_defaults() {
        let cfg: RunConfig =
            toml::from_str("[optimizer]\nswarm_size = 10\nmax_evaluations = 500\n").unwrap();
        assert_eq!(cfg.optimizer.swarm_size, 10);
        assert_eq!(cfg.optimizer.max_evaluations, 500);
        assert_eq!(cfg.optimizer.inner_iterations, OptConfig::default().inner_iterations);
        assert_eq!(cfg.evaluation, EvalConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[optimizer]\nswarm = 10\n").is_err());
    }
}
