//! Application configuration.
//!
//! Layers, lowest to highest precedence: built-in defaults, `kzb.toml` in the
//! data directory, environment variables, then command-line flags (applied by
//! the CLI on top of [`AppConfig::load_layered`]).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunker::{ChunkError, ChunkingParams};
use crate::provider::{ProviderConfig, ProviderError};
use crate::rag::{RagError, RagParams};
use crate::secret::{REDACTED, Secret};
use crate::zotero::{DEFAULT_API_BASE, LibraryDescriptor, ZoteroError};

pub const CONFIG_FILE: &str = "kzb.toml";
pub const INDEX_FILE: &str = "index.kzb";
pub const ENV_ZOTERO_KEY: &str = "KZB_ZOTERO_KEY";
pub const ENV_OPENAI_KEY: &str = "KZB_OPENAI_KEY";
pub const ENV_DATA_DIR: &str = "KZB_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "kzb-data";
pub const DEFAULT_LISTEN_ADDR: &str = "127.0.0.1:8765";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("zotero: {0}")]
    Zotero(#[from] ZoteroError),
    #[error("provider: {0}")]
    Provider(#[from] ProviderError),
    #[error("chunking: {0}")]
    Chunking(#[from] ChunkError),
    #[error("rag: {0}")]
    Rag(#[from] RagError),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config I/O failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub zotero: LibraryDescriptor,
    /// Root of the Zotero API; replaced by a local mock in tests.
    pub zotero_api_base: String,
    pub provider: ProviderConfig,
    pub chunking: ChunkingParams,
    pub rag: RagParams,
    pub data_dir: PathBuf,
    pub listen_addr: String,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            zotero: LibraryDescriptor::default(),
            zotero_api_base: DEFAULT_API_BASE.to_string(),
            provider: ProviderConfig::default(),
            chunking: ChunkingParams::default(),
            rag: RagParams::default(),
            data_dir: PathBuf::from(DEFAULT_DATA_DIR),
            listen_addr: DEFAULT_LISTEN_ADDR.to_string(),
        }
    }
}

impl AppConfig {
    /// Resolves the data directory (flag, then `KZB_DATA_DIR`, then the
    /// default), reads `kzb.toml` from it if present, then applies the key
    /// environment variables.
    pub fn load_layered(
        data_dir_flag: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
    ) -> Result<Self, ConfigError> {
        let data_dir = data_dir_flag
            .map(Path::to_path_buf)
            .or_else(|| env(ENV_DATA_DIR).filter(|s| !s.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR));

        let file = data_dir.join(CONFIG_FILE);
        let mut config = if file.exists() {
            let text = fs::read_to_string(&file)?;
            Self::from_toml_str(&text).map_err(|message| ConfigError::Parse { path: file, message })?
        } else {
            Self::default()
        };
        config.data_dir = data_dir;

        if let Some(key) = env(ENV_ZOTERO_KEY).filter(|s| !s.is_empty()) {
            config.zotero.api_key = Secret::new(key);
        }
        if let Some(key) = env(ENV_OPENAI_KEY).filter(|s| !s.is_empty()) {
            config.provider.api_key = Secret::new(key);
        }
        Ok(config)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        toml::to_string_pretty(self).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Writes `kzb.toml` into the data directory, owner-readable only.
    pub fn save(&self) -> Result<PathBuf, ConfigError> {
        fs::create_dir_all(&self.data_dir)?;
        let path = self.data_dir.join(CONFIG_FILE);
        fs::write(&path, self.to_toml_string()?)?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            fs::set_permissions(&path, fs::Permissions::from_mode(0o600))?;
        }
        Ok(path)
    }

    /// Checks everything needed to answer questions from an existing index.
    pub fn validate_engine(&self) -> Result<(), ConfigError> {
        self.provider.validate()?;
        self.chunking.validate()?;
        self.rag.validate()?;
        if self.listen_addr.parse::<std::net::SocketAddr>().is_err() {
            return Err(ConfigError::Invalid(format!(
                "listen_addr is not host:port: {}",
                self.listen_addr
            )));
        }
        Ok(())
    }

    /// All component invariants, including a usable Zotero descriptor.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.zotero.validate()?;
        self.validate_engine()
    }

    /// Creates the data directory and checks it accepts writes.
    pub fn ensure_data_dir(&self) -> Result<(), ConfigError> {
        fs::create_dir_all(&self.data_dir)?;
        let probe = self.data_dir.join(".write-probe");
        fs::write(&probe, b"")?;
        fs::remove_file(&probe)?;
        Ok(())
    }

    pub fn index_path(&self) -> PathBuf {
        self.data_dir.join(INDEX_FILE)
    }

    /// Copy safe to show: set secrets become `***`, unset ones stay empty.
    pub fn redacted(&self) -> Self {
        let mut out = self.clone();
        for key in [&mut out.zotero.api_key, &mut out.provider.api_key] {
            if !key.is_empty() {
                *key = Secret::new(REDACTED);
            }
        }
        out
    }

    /// Applies an update from a client that only ever saw redacted secrets:
    /// a blank or `***` key keeps the current one. Process-level settings
    /// (data directory, listen address) are not changed.
    pub fn merge_update(&self, mut update: AppConfig) -> AppConfig {
        if update.zotero.api_key.is_placeholder() {
            update.zotero.api_key = self.zotero.api_key.clone();
        }
        if update.provider.api_key.is_placeholder() {
            update.provider.api_key = self.provider.api_key.clone();
        }
        update.data_dir = self.data_dir.clone();
        update.listen_addr = self.listen_addr.clone();
        update
    }
}
