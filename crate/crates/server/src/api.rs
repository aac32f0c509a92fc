//! JSON-over-HTTP API.
//!
//! | method | path | |
//! |---|---|---|
//! | GET/POST | `/api/config` | read (secrets redacted) / update |
//! | POST | `/api/config/validate` | probe Zotero with the stored credentials |
//! | POST | `/api/ingest` | start the background ingest job (202) |
//! | GET | `/api/ingest/status` | ingest progress |
//! | POST | `/api/sessions` | new chat session (201) |
//! | POST | `/api/sessions/{id}/chat` | ask a question |
//! | GET | `/api/sessions/{id}/history` | turns |
//! | GET | `/api/sessions/{id}/export.csv` | transcript as CSV |
//! | GET | `/api/health` | index size and dimension |

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{StatusCode, header};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kzb_core::ingest::StatusHandle;
use kzb_core::{
    Answer, AppConfig, ChatTurn, IngestState, IngestStatus, Ingestor, Providers, RagEngine, RetryPolicy,
    SessionStore, VectorIndex, ZoteroClient,
};
use serde::Deserialize;
use serde_json::{Value, json};

use crate::StartupError;
use crate::error::ApiError;

pub const STATUS_PATH: &str = "/api/ingest/status";

/// Everything the handlers share.
pub struct AppState {
    config: RwLock<AppConfig>,
    providers: RwLock<Providers>,
    /// Providers were injected and survive config updates.
    fixed_providers: bool,
    index: tokio::sync::RwLock<VectorIndex>,
    sessions: SessionStore,
    ingest: StatusHandle,
    chat_locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
    zotero_retry: RetryPolicy,
}

impl std::fmt::Debug for AppState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AppState")
            .field("sessions", &self.sessions)
            .finish_non_exhaustive()
    }
}

impl AppState {
    /// Opens the data directory, loads any existing index and builds the
    /// providers named by `config`.
    pub fn new(config: AppConfig) -> Result<Self, StartupError> {
        config.validate_engine()?;
        config.ensure_data_dir()?;
        let providers = Providers::from_config(&config.provider)?;
        let sessions = SessionStore::open(&config.data_dir)?;
        let index = load_index(&config);
        Ok(Self {
            config: RwLock::new(config),
            providers: RwLock::new(providers),
            fixed_providers: false,
            index: tokio::sync::RwLock::new(index),
            sessions,
            ingest: StatusHandle::default(),
            chat_locks: Mutex::default(),
            zotero_retry: RetryPolicy::default(),
        })
    }

    /// Pins the providers, ignoring provider settings in later config updates.
    pub fn with_providers(mut self, providers: Providers) -> Self {
        self.providers = RwLock::new(providers);
        self.fixed_providers = true;
        self
    }

    pub fn with_zotero_retry(mut self, retry: RetryPolicy) -> Self {
        self.zotero_retry = retry;
        self
    }

    pub fn config(&self) -> AppConfig {
        self.config.read().expect("config poisoned").clone()
    }

    fn providers(&self) -> Providers {
        self.providers.read().expect("providers poisoned").clone()
    }

    fn session_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.chat_locks.lock().expect("chat locks poisoned");
        Arc::clone(locks.entry(id.to_string()).or_default())
    }
}

fn load_index(config: &AppConfig) -> VectorIndex {
    let path = config.index_path();
    if !path.exists() {
        return VectorIndex::new();
    }
    match VectorIndex::load(&path) {
        Ok(index) => {
            tracing::info!(records = index.len(), path = %path.display(), "loaded index");
            index
        }
        Err(err) => {
            tracing::warn!(error = %err, path = %path.display(), "ignoring unreadable index; re-run ingestion");
            VectorIndex::new()
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/config", get(get_config).post(post_config))
        .route("/api/config/validate", post(validate_config))
        .route("/api/ingest", post(start_ingest))
        .route(STATUS_PATH, get(ingest_status))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/chat", post(chat))
        .route("/api/sessions/{id}/history", get(history))
        .route("/api/sessions/{id}/export.csv", get(export_csv))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    state: Arc<AppState>,
    listener: tokio::net::TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request("invalid_json", e.body_text()))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed")
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    let index = state.index.read().await;
    Json(json!({
        "status": "ok",
        "index_size": index.len(),
        "dimension": index.dimension(),
    }))
}

async fn get_config(State(state): State<Arc<AppState>>) -> Json<AppConfig> {
    Json(state.config().redacted())
}

/// Merges the posted fields into the current config. Omitted sections and
/// fields keep their values; secrets sent as `""` or `"***"` are unchanged.
async fn post_config(
    State(state): State<Arc<AppState>>,
    body: Result<Json<Value>, JsonRejection>,
) -> Result<Json<AppConfig>, ApiError> {
    let patch = json_body(body)?;
    if !patch.is_object() {
        return Err(ApiError::bad_request("invalid_json", "expected a JSON object"));
    }
    let current = state.config();
    let mut merged = serde_json::to_value(&current).map_err(|e| ApiError::internal(e.to_string()))?;
    merge_json(&mut merged, patch);
    let update: AppConfig =
        serde_json::from_value(merged).map_err(|e| ApiError::bad_request("invalid_config", e.to_string()))?;
    let next = current.merge_update(update);

    next.validate_engine()?;
    if !next.zotero.library_id.is_empty() {
        next.zotero.validate()?;
    }
    let providers = if state.fixed_providers {
        None
    } else {
        Some(Providers::from_config(&next.provider)?)
    };
    next.save()?;

    *state.config.write().expect("config poisoned") = next.clone();
    if let Some(p) = providers {
        *state.providers.write().expect("providers poisoned") = p;
    }
    Ok(Json(next.redacted()))
}

fn merge_json(target: &mut Value, patch: Value) {
    match (target, patch) {
        (Value::Object(t), Value::Object(p)) => {
            for (k, v) in p {
                merge_json(t.entry(k).or_insert(Value::Null), v);
            }
        }
        (t, p) => *t = p,
    }
}

async fn validate_config(State(state): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let config = state.config();
    ZoteroClient::new(&config.zotero_api_base)
        .with_retry_policy(state.zotero_retry)
        .validate_credentials(&config.zotero)
        .await?;
    Ok(Json(json!({ "ok": true })))
}

async fn start_ingest(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let config = state.config();
    config.zotero.validate()?;
    if !state.ingest.try_start() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "ingest_running",
            "an ingest job is already running",
        ));
    }

    let job = Arc::clone(&state);
    tokio::spawn(async move {
        let zotero = ZoteroClient::new(&config.zotero_api_base).with_retry_policy(job.zotero_retry);
        let ingestor =
            Ingestor::new(zotero, job.providers().embedder, config.chunking).with_status(job.ingest.clone());
        // Inner task so a panic is reported as a failed job.
        let run = tokio::spawn(async move { ingestor.ingest_zotero(&config.zotero, &config.index_path()).await });
        match run.await {
            Ok(Ok(index)) => *job.index.write().await = index,
            Ok(Err(err)) => tracing::warn!(error = %err, "ingest failed"),
            Err(panic) => job.ingest.update(|s| {
                s.state = IngestState::Failed;
                s.errors.push(format!("ingest task crashed: {panic}"));
            }),
        }
    });

    let body = Json(json!({ "status_url": STATUS_PATH }));
    Ok((StatusCode::ACCEPTED, [(header::LOCATION, STATUS_PATH)], body).into_response())
}

async fn ingest_status(State(state): State<Arc<AppState>>) -> Json<IngestStatus> {
    Json(state.ingest.snapshot())
}

async fn create_session(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let session = state.sessions.create_session()?;
    let body = Json(json!({ "session_id": session.session_id, "created_at": session.created_at }));
    Ok((StatusCode::CREATED, body).into_response())
}

#[derive(Deserialize)]
struct ChatRequest {
    question: String,
}

/// Questions to one session are answered one at a time, in the order their
/// handlers reach the session lock (tokio's mutex is FIFO).
async fn chat(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<ChatRequest>, JsonRejection>,
) -> Result<Json<Answer>, ApiError> {
    let request = json_body(body)?;
    state.sessions.get_session(&id)?;
    let lock = state.session_lock(&id);
    let _turn = lock.lock().await;

    let history = state.sessions.get_history(&id)?;
    let config = state.config();
    let engine = RagEngine::new(state.providers(), config.provider.chat_model.clone());
    let answer = {
        let index = state.index.read().await;
        engine
            .answer_question(&request.question, &history, &config.rag, &index)
            .await?
    };
    state
        .sessions
        .append_exchange(&id, answer.question.clone(), answer.text.clone(), answer.citation_ids())?;
    Ok(Json(answer))
}

async fn history(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Vec<ChatTurn>>, ApiError> {
    Ok(Json(state.sessions.get_history(&id)?))
}

async fn export_csv(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let bytes = state.sessions.export_csv(&id)?;
    let disposition = format!("attachment; filename=\"kzb-history-{id}.csv\"");
    Ok((
        [
            (header::CONTENT_TYPE, "text/csv; charset=utf-8".to_string()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        bytes,
    )
        .into_response())
}
