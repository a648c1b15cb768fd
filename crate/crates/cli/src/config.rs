//! Experiment configuration: algebra presentations, budgets, seeds and
//! output selection, loaded from JSON. Unknown experiment names and
//! out-of-range budgets are rejected at parse time.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use opalg_core::wire::{AlgebraWire, StateWire};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Separation,
    MaxChsh,
    Certify,
    Counterexample,
    RepresentationCheck,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Separation => "separation",
            ExperimentKind::MaxChsh => "max-chsh",
            ExperimentKind::Certify => "certify",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::RepresentationCheck => "representation-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Search budgets and tolerances. Every field has a sensible default so a
/// minimal config only names the two algebras.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    pub restarts: usize,
    pub max_iter: usize,
    pub max_terms: usize,
    pub seesaw_tol: f64,
    pub decomp_tol: f64,
    pub algebra_tol: f64,
    pub product_tol: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            restarts: 20,
            max_iter: 500,
            max_terms: 200,
            seesaw_tol: 1e-10,
            decomp_tol: 1e-6,
            algebra_tol: 1e-9,
            product_tol: 1e-8,
        }
    }
}

impl Budgets {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("restarts", self.restarts),
            ("max_iter", self.max_iter),
            ("max_terms", self.max_terms),
        ] {
            if v == 0 {
                return Err(ConfigError::Invalid(format!("budget {name} must be positive")));
            }
        }
        for (name, v) in [
            ("seesaw_tol", self.seesaw_tol),
            ("decomp_tol", self.decomp_tol),
            ("algebra_tol", self.algebra_tol),
            ("product_tol", self.product_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(ConfigError::Invalid(format!(
                    "tolerance {name} = {v} must lie in (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: Option<String>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

fn default_format() -> OutputFormat {
    OutputFormat::Json
}

/// A full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub left: AlgebraWire,
    pub right: AlgebraWire,
    /// Optional; when present it must match the experiment given on the
    /// command line.
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budgets: Budgets,
    /// Input state for `certify`; sampled from the seed when absent.
    #[serde(default)]
    pub state: Option<StateWire>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        config.budgets.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"left": {"label": "A", "blocks": [2]},
                "right": {"label": "B", "blocks": [2]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.budgets.restarts, 20);
        assert!(cfg.experiment.is_none());
    }

    #[test]
    fn unknown_experiment_rejected_at_parse_time() {
        let err = ExperimentConfig::from_json(
            r#"{"left": {"label": "A", "blocks": [2]},
                "right": {"label": "B", "blocks": [2]},
                "experiment": "teleportation"}"#,
        )
        .unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert!(line >= 1),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn budgets_must_be_positive_and_tolerances_in_unit_interval() {
        let err = ExperimentConfig::from_json(
            r#"{"left": {"label": "A", "blocks": [2]},
                "right": {"label": "B", "blocks": [2]},
                "budgets": {"restarts": 0}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));

        let err = ExperimentConfig::from_json(
            r#"{"left": {"label": "A", "blocks": [2]},
                "right": {"label": "B", "blocks": [2]},
                "budgets": {"seesaw_tol": 2.0}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = ExperimentConfig::from_json("{ not json").unwrap_err();
        match err {
            ConfigError::Parse { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column > 1);
            }
            other => panic!("expected parse error, got {other}"),
        }
    }
}
