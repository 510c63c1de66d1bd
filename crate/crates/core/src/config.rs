//! JSON configuration file shared by the command-line tools.
//!
//! Every field is optional:
//!
//! ```json
//! {
//!   "search": {"max_step": 7, "max_traces": 50, "trigger_pruning": true},
//!   "linearization": {"mode": "template", "scan": "horizontal", "order": "tf"},
//!   "mode": "voting",
//!   "timeout_ms": 10000,
//!   "threads": 8,
//!   "paths": {"data_root": "data", "tables": "data/all_csv", "model": "ranker.json"},
//!   "train": {"epochs": 10, "learning_rate": 0.1}
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{Pipeline, DEFAULT_TIMEOUT_MS};
use crate::linearize::LinearizationSpec;
use crate::ranker::{Label, Mode, ScorerModel, TrainConfig};
use crate::search::SearchConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("search.max_step and search.max_traces must be at least 1")]
    ZeroBound,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub data_root: Option<PathBuf>,
    pub tables: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub search: SearchConfig,
    pub linearization: LinearizationSpec,
    pub mode: Mode,
    pub default_label: Label,
    pub timeout_ms: u64,
    pub threads: Option<usize>,
    pub paths: Paths,
    pub train: TrainConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            search: SearchConfig::default(),
            linearization: LinearizationSpec::default(),
            mode: Mode::Voting,
            default_label: Label::Refuted,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            threads: None,
            paths: Paths::default(),
            train: TrainConfig::default(),
        }
    }
}

impl EngineConfig {
    pub fn from_json(text: &str) -> Result<EngineConfig, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<EngineConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::from_json(&text).map_err(|source| ConfigError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.search.max_step == 0 || self.search.max_traces == 0 {
            return Err(ConfigError::ZeroBound);
        }
        Ok(())
    }

    pub fn pipeline(&self, model: Option<ScorerModel>) -> Pipeline {
        let mut search = self.search.clone();
        if search.timeout_ms.is_none() && self.timeout_ms > 0 {
            search.timeout_ms = Some(self.timeout_ms);
        }
        Pipeline {
            search,
            mode: self.mode,
            model,
            default_label: self.default_label,
        }
    }
}
