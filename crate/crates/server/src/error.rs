use axum::Json;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use kzb_core::{ConfigError, IndexError, ProviderError, RagError, SessionError, ZoteroError};
use serde_json::json;

/// An error as the API reports it: `{"error": {"code", "message"}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(code = self.code, message = %self.message, "request failed");
        }
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(err: SessionError) -> Self {
        match err {
            SessionError::UnknownSession(_) => Self::new(StatusCode::NOT_FOUND, "unknown_session", err.to_string()),
            SessionError::RoleOrderViolation { .. } => Self::new(StatusCode::CONFLICT, "role_order", err.to_string()),
            SessionError::Corrupt(_) | SessionError::Io(_) => Self::internal(err.to_string()),
        }
    }
}

impl From<ProviderError> for ApiError {
    fn from(err: ProviderError) -> Self {
        let code = match err {
            ProviderError::AuthFailed => "provider_auth_failed",
            ProviderError::RateLimited => "provider_rate_limited",
            ProviderError::Config(_) | ProviderError::InvalidInput(_) => {
                return Self::bad_request("invalid_provider_config", err.to_string());
            }
            _ => "provider_error",
        };
        Self::new(StatusCode::BAD_GATEWAY, code, err.to_string())
    }
}

impl From<RagError> for ApiError {
    fn from(err: RagError) -> Self {
        match err {
            RagError::EmptyQuestion => Self::bad_request("empty_question", err.to_string()),
            RagError::InvalidParams(_) => Self::bad_request("invalid_params", err.to_string()),
            RagError::EmptyIndex | RagError::EmptyContext => {
                Self::new(StatusCode::CONFLICT, "index_empty", err.to_string())
            }
            RagError::Embedding(e) | RagError::Chat(e) => e.into(),
            RagError::Index(IndexError::DimensionMismatch { .. }) => Self::new(
                StatusCode::CONFLICT,
                "index_model_mismatch",
                format!("{err}; re-run ingestion after changing the embedding model"),
            ),
            RagError::Index(_) => Self::internal(err.to_string()),
        }
    }
}

impl From<ZoteroError> for ApiError {
    fn from(err: ZoteroError) -> Self {
        let (status, code) = match err {
            ZoteroError::InvalidDescriptor(_) => (StatusCode::BAD_REQUEST, "invalid_config"),
            ZoteroError::AuthFailed => (StatusCode::BAD_REQUEST, "zotero_auth_failed"),
            ZoteroError::NotFound => (StatusCode::BAD_REQUEST, "zotero_not_found"),
            ZoteroError::RateLimited { .. } => (StatusCode::TOO_MANY_REQUESTS, "zotero_rate_limited"),
            _ => (StatusCode::BAD_GATEWAY, "zotero_error"),
        };
        Self::new(status, code, err.to_string())
    }
}

impl From<ConfigError> for ApiError {
    fn from(err: ConfigError) -> Self {
        match err {
            ConfigError::Io(_) => Self::internal(err.to_string()),
            _ => Self::bad_request("invalid_config", err.to_string()),
        }
    }
}
