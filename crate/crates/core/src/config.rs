//! Engine configuration: a TOML file with environment overrides.
//!
//! Every section and key is optional; unknown keys are rejected.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ranker::RankerConfig;

pub const ENV_CONFIG: &str = "ENGINE_CONFIG";
pub const ENV_DATA_DIR: &str = "ENGINE_DATA_DIR";
pub const ENV_PORT: &str = "ENGINE_PORT";

/// Data shipped with the crate.
pub fn bundled_data_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data"))
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {msg}")]
    Read { path: PathBuf, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    /// Root of the resource tree. Relative paths below resolve against it.
    pub data_dir: PathBuf,
    pub flow_dirs: Vec<PathBuf>,
    /// Directory for the long-term archive; in-memory when unset.
    pub archive_dir: Option<PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            data_dir: bundled_data_dir(),
            flow_dirs: vec![PathBuf::from("flows")],
            archive_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NluConfig {
    pub asr_threshold: f64,
}

impl Default for NluConfig {
    fn default() -> Self {
        NluConfig { asr_threshold: 0.4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MemoryConfig {
    /// Focus entries this many user turns old move to the archive.
    pub flush_threshold: u32,
    /// User turns per additional intimacy level.
    pub intimacy_period: u32,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        MemoryConfig { flush_threshold: 10, intimacy_period: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DialogueConfig {
    /// Questions with fewer content words get an ELIZA probe.
    pub qa_min_content_words: usize,
    pub inability_phrase: String,
    /// Completed engagements between feedback requests.
    pub feedback_period: usize,
    /// Consecutive out-of-domain turns after which the menu is re-offered.
    pub ood_menu_after: u32,
    /// Topics offered first in the menu, in order.
    pub menu_topics: Vec<String>,
    pub menu_size: usize,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        DialogueConfig {
            qa_min_content_words: 2,
            inability_phrase: "I'm not sure about that one".into(),
            feedback_period: 3,
            ood_menu_after: 2,
            menu_topics: ["video_games", "travel", "music", "animals", "books", "astronomy", "dinosaurs"]
                .map(String::from)
                .to_vec(),
            menu_size: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProvidersConfig {
    /// Provider names in query order.
    pub order: Vec<String>,
    pub timeout_ms: u64,
    /// Minimum retrieval score for the offline provider.
    pub min_score: f64,
}

impl Default for ProvidersConfig {
    fn default() -> Self {
        ProvidersConfig { order: vec!["offline".into()], timeout_ms: 1500, min_score: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionConfig {
    /// Seed for sessions created without one. Random when unset.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub paths: PathsConfig,
    pub nlu: NluConfig,
    pub ranker: RankerConfig,
    pub memory: MemoryConfig,
    pub dialogue: DialogueConfig,
    pub providers: ProvidersConfig,
    pub session: SessionConfig,
}

impl EngineConfig {
    pub fn from_toml(body: &str) -> Result<Self, ConfigError> {
        let cfg: EngineConfig = toml::from_str(body).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let body = fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&body)?;
        if cfg.paths.data_dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.paths.data_dir = parent.join(&cfg.paths.data_dir);
            }
        }
        Ok(cfg)
    }

    /// Reads `ENGINE_CONFIG` (or `explicit`) and applies `ENGINE_DATA_DIR`.
    pub fn from_env(explicit: Option<&Path>) -> Result<Self, ConfigError> {
        let path = explicit.map(Path::to_path_buf).or_else(|| env::var_os(ENV_CONFIG).map(PathBuf::from));
        let mut cfg = match path {
            Some(p) => Self::load(&p)?,
            None => EngineConfig::default(),
        };
        if let Some(dir) = env::var_os(ENV_DATA_DIR) {
            cfg.paths.data_dir = PathBuf::from(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.ranker.validate().map_err(ConfigError::Invalid)?;
        if !(0.0..=1.0).contains(&self.nlu.asr_threshold) {
            return Err(ConfigError::Invalid(format!(
                "nlu.asr_threshold must lie in [0, 1], got {}",
                self.nlu.asr_threshold
            )));
        }
        if self.memory.intimacy_period == 0 {
            return Err(ConfigError::Invalid("memory.intimacy_period must be at least 1".into()));
        }
        if self.dialogue.feedback_period == 0 {
            return Err(ConfigError::Invalid("dialogue.feedback_period must be at least 1".into()));
        }
        if self.dialogue.inability_phrase.trim().is_empty() {
            return Err(ConfigError::Invalid("dialogue.inability_phrase must not be empty".into()));
        }
        if let Some(bad) = self.providers.order.iter().find(|p| p.as_str() != "offline") {
            return Err(ConfigError::Invalid(format!("unknown provider `{bad}`")));
        }
        if self.providers.timeout_ms == 0 {
            return Err(ConfigError::Invalid("providers.timeout_ms must be positive".into()));
        }
        Ok(())
    }

    /// Resolves a path from the config against the data directory.
    pub fn data_path(&self, rel: impl AsRef<Path>) -> PathBuf {
        let rel = rel.as_ref();
        if rel.is_absolute() {
            rel.to_path_buf()
        } else {
            self.paths.data_dir.join(rel)
        }
    }

    pub fn flow_dirs(&self) -> Vec<PathBuf> {
        self.paths.flow_dirs.iter().map(|d| self.data_path(d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(EngineConfig::from_toml("[ranker]\nbase_confidence = 0.6\n").is_ok());
        assert!(EngineConfig::from_toml("[ranker]\nbogus = 1\n").is_err());
        assert!(EngineConfig::from_toml("[nope]\n").is_err());
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        assert!(EngineConfig::from_toml("[ranker]\nood_threshold = 1.5\n").is_err());
        assert!(EngineConfig::from_toml("[ranker]\nrepeat_penalty = -0.1\n").is_err());
        assert!(EngineConfig::from_toml("[providers]\norder = [\"bing\"]\n").is_err());
    }
}
