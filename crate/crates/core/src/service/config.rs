//! TOML service configuration. Relative paths resolve against the config
//! file's directory. `EDVERT_LISTEN` overrides `listen`.

use std::path::{Path, PathBuf};

use chrono::TimeDelta;
use serde::Deserialize;
use thiserror::Error;

use crate::engine::EngineConfig;
use crate::filter::FilterSet;
use crate::placement::{default_units, AdUnit, DEFAULT_RATE};
use crate::quizgen::DEFAULT_OPTION_COUNT;
use crate::scheduler::{Ladder, DEFAULT_LADDER_SECS};
use crate::analytics::DEFAULT_SESSION_TIMEOUT_SECS;
use crate::vocab::{Deck, DeckError};

pub const LISTEN_ENV: &str = "EDVERT_LISTEN";
pub const CONFIG_ENV: &str = "EDVERT_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("deck {path}: {source}")]
    Deck {
        path: PathBuf,
        #[source]
        source: DeckError,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn default_listen() -> String {
    "127.0.0.1:8080".to_owned()
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_ladder() -> Vec<i64> {
    DEFAULT_LADDER_SECS.to_vec()
}

fn default_rate() -> usize {
    DEFAULT_RATE
}

fn default_options() -> usize {
    DEFAULT_OPTION_COUNT
}

fn default_timeout() -> i64 {
    DEFAULT_SESSION_TIMEOUT_SECS
}

fn default_link_url() -> String {
    "http://127.0.0.1:8080/site".to_owned()
}

fn default_study_words() -> usize {
    50
}

fn default_snapshot_every() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub deck: PathBuf,
    pub filter_list: PathBuf,
    #[serde(default = "default_listen")]
    pub listen: String,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default = "default_ladder")]
    pub ladder_secs: Vec<i64>,
    #[serde(default = "default_rate")]
    pub rate: usize,
    #[serde(default = "default_options")]
    pub options: usize,
    #[serde(default = "default_timeout")]
    pub session_timeout_secs: i64,
    #[serde(default = "default_link_url")]
    pub link_url: String,
    #[serde(default = "default_study_words")]
    pub study_words: usize,
    #[serde(default)]
    pub seed: u64,
    /// Write a state snapshot every this many events; 0 disables.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_units")]
    pub ad_units: Vec<AdUnit>,
}

/// Everything loaded from the files a config points at.
#[derive(Debug, Clone)]
pub struct Resources {
    pub engine: EngineConfig,
    pub filters: FilterSet,
    pub units: Vec<AdUnit>,
}

impl ServiceConfig {
    /// Reads `path` and applies the listen-address environment override.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::from_toml(&text, base).map_err(|e| match e {
            ConfigError::Syntax { message, .. } => ConfigError::Syntax {
                path: path.to_owned(),
                message,
            },
            other => other,
        })?;
        if let Ok(listen) = std::env::var(LISTEN_ENV) {
            cfg.listen = listen;
        }
        Ok(cfg)
    }

    /// Parses TOML text, resolving relative paths against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg: ServiceConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax {
            path: PathBuf::new(),
            message: e.to_string(),
        })?;
        for p in [&mut cfg.deck, &mut cfg.filter_list, &mut cfg.data_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Loads the deck and filter list and validates the numeric settings.
    pub fn resources(&self) -> Result<Resources, ConfigError> {
        let deck = Deck::load(&self.deck).map_err(|source| ConfigError::Deck {
            path: self.deck.clone(),
            source,
        })?;
        let study_set = deck
            .apply_exclusions()
            .and_then(|d| d.select_study_set(self.study_words, self.seed))
            .map_err(|source| ConfigError::Deck {
                path: self.deck.clone(),
                source,
            })?;
        let filter_text = std::fs::read_to_string(&self.filter_list).map_err(|source| ConfigError::Io {
            path: self.filter_list.clone(),
            source,
        })?;
        let ladder = Ladder::from_secs(self.ladder_secs.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.rate == 0 {
            return Err(ConfigError::Invalid("rate must be positive".into()));
        }
        if self.options < 2 {
            return Err(ConfigError::Invalid("options must be at least 2".into()));
        }
        if self.session_timeout_secs <= 0 {
            return Err(ConfigError::Invalid("session_timeout_secs must be positive".into()));
        }
        if self.ad_units.is_empty() || self.ad_units.iter().any(|u| u.width == 0 || u.height == 0) {
            return Err(ConfigError::Invalid("ad_units must list units with positive sizes".into()));
        }
        let engine = EngineConfig {
            ladder,
            options: self.options,
            rate: self.rate,
            session_timeout: TimeDelta::seconds(self.session_timeout_secs),
            link_url: self.link_url.clone(),
            seed: self.seed,
            ..EngineConfig::new(study_set)
        };
        Ok(Resources {
            engine,
            filters: FilterSet::parse(&filter_text),
            units: self.ad_units.clone(),
        })
    }
}
