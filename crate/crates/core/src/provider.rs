//! Configuration and errors shared by the embedding and chat providers.

use std::sync::Arc;
use std::time::Duration;

use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chat::{CannedChat, ChatProvider, OpenAiChat};
use crate::embeddings::{Embedder, MockEmbedder, OpenAiEmbedder};
use crate::retry::RetryPolicy;
use crate::secret::Secret;

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1";
pub const DEFAULT_EMBEDDING_MODEL: &str = "text-embedding-ada-002";
pub const DEFAULT_CHAT_MODEL: &str = "gpt-3.5-turbo";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    Live,
    /// Offline: bag-of-words embeddings and the canned extractive chat model.
    #[default]
    Mock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    /// Base URL of an OpenAI-compatible API; `/embeddings` and
    /// `/chat/completions` are appended.
    pub endpoint_url: String,
    pub api_key: Secret,
    pub embedding_model: String,
    pub chat_model: String,
    /// Per-request timeout in seconds.
    pub request_timeout: u64,
    pub mode: ProviderMode,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            endpoint_url: DEFAULT_ENDPOINT.to_string(),
            api_key: Secret::default(),
            embedding_model: DEFAULT_EMBEDDING_MODEL.to_string(),
            chat_model: DEFAULT_CHAT_MODEL.to_string(),
            request_timeout: 60,
            mode: ProviderMode::Mock,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.mode == ProviderMode::Live {
            if self.api_key.is_empty() {
                return Err(ProviderError::Config("api_key is required in live mode".into()));
            }
            if reqwest::Url::parse(&self.endpoint_url).is_err() {
                return Err(ProviderError::Config(format!(
                    "endpoint_url is not a valid URL: {}",
                    self.endpoint_url
                )));
            }
        }
        if self.embedding_model.trim().is_empty() {
            return Err(ProviderError::Config("embedding_model must not be empty".into()));
        }
        if self.request_timeout == 0 {
            return Err(ProviderError::Config("request_timeout must be positive".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.request_timeout)
    }

    pub(crate) fn endpoint(&self, path: &str) -> String {
        format!("{}/{}", self.endpoint_url.trim_end_matches('/'), path)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("provider rejected the API key")]
    AuthFailed,
    #[error("provider rate limit still in effect after retries")]
    RateLimited,
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("provider returned status {status}: {message}")]
    Status { status: u16, message: String },
    #[error("provider request failed: {0}")]
    Transport(String),
    #[error("embedding dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid provider configuration: {0}")]
    Config(String),
}

impl ProviderError {
    /// Maps a non-success status after retries; `body` is scrubbed of `key`.
    pub(crate) fn from_status(status: StatusCode, body: &str, key: &Secret) -> Self {
        match status {
            StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => ProviderError::AuthFailed,
            StatusCode::TOO_MANY_REQUESTS => ProviderError::RateLimited,
            _ => {
                let message = serde_json::from_str::<serde_json::Value>(body)
                    .ok()
                    .and_then(|v| v.pointer("/error/message")?.as_str().map(str::to_owned))
                    .unwrap_or_else(|| body.chars().take(200).collect());
                ProviderError::Status {
                    status: status.as_u16(),
                    message: key.scrub(&message),
                }
            }
        }
    }

    pub(crate) fn transport(err: reqwest::Error, key: &Secret) -> Self {
        ProviderError::Transport(key.scrub(&err.to_string()))
    }
}

/// The embedder and chat model the engine talks to.
#[derive(Clone)]
pub struct Providers {
    pub embedder: Arc<dyn Embedder>,
    pub chat: Arc<dyn ChatProvider>,
}

impl std::fmt::Debug for Providers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Providers")
            .field("embedding_model", &self.embedder.model())
            .finish_non_exhaustive()
    }
}

impl Providers {
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        Self::from_config_with_retry(cfg, RetryPolicy::default())
    }

    pub fn from_config_with_retry(cfg: &ProviderConfig, retry: RetryPolicy) -> Result<Self, ProviderError> {
        cfg.validate()?;
        Ok(match cfg.mode {
            ProviderMode::Mock => Self {
                embedder: Arc::new(MockEmbedder::default()),
                chat: Arc::new(CannedChat::default()),
            },
            ProviderMode::Live => Self {
                embedder: Arc::new(OpenAiEmbedder::new(cfg)?.with_retry_policy(retry)),
                chat: Arc::new(OpenAiChat::new(cfg)?.with_retry_policy(retry)),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = ProviderConfig::default();
        assert_eq!(cfg.embedding_model, "text-embedding-ada-002");
        assert_eq!(cfg.mode, ProviderMode::Mock);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn live_mode_needs_key() {
        let cfg = ProviderConfig {
            mode: ProviderMode::Live,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(ProviderError::Config(_))));
        let cfg = ProviderConfig {
            api_key: Secret::new("sk"),
            ..cfg
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn status_mapping_scrubs_key() {
        let key = Secret::new("sk-abc");
        assert_eq!(
            ProviderError::from_status(StatusCode::UNAUTHORIZED, "", &key),
            ProviderError::AuthFailed
        );
        let err = ProviderError::from_status(
            StatusCode::BAD_REQUEST,
            r#"{"error":{"message":"bad key sk-abc here"}}"#,
            &key,
        );
        assert_eq!(
            err,
            ProviderError::Status {
                status: 400,
                message: "bad key *** here".into()
            }
        );
    }

    #[test]
    fn endpoint_join() {
        let cfg = ProviderConfig {
            endpoint_url: "http://localhost:9/v1/".into(),
            ..Default::default()
        };
        assert_eq!(cfg.endpoint("embeddings"), "http://localhost:9/v1/embeddings");
    }
}
