//! In-process mock of an OpenAI-compatible `/v1/embeddings` and
//! `/v1/chat/completions` endpoint pair.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use axum::Router;
use axum::body::Bytes;
use axum::extract::State;
use axum::http::{HeaderMap, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use serde_json::{Value, json};

use crate::server::{RecordedRequest, Served};

type EmbedFn = Arc<dyn Fn(&str) -> Vec<f32> + Send + Sync>;
type ReplyFn = Arc<dyn Fn(&Value) -> String + Send + Sync>;

/// How the mock answers.
#[derive(Clone)]
pub struct ProviderBehavior {
    /// Bearer token the mock accepts; anything else is a 401.
    pub api_key: String,
    pub embed: EmbedFn,
    /// Returns `data` in reverse index order, as a server may.
    pub reverse_order: bool,
    /// Replaces every embeddings response body when set.
    pub fixed_embeddings: Option<Value>,
    /// Builds the assistant reply from the request's `messages` array.
    pub reply: ReplyFn,
}

impl ProviderBehavior {
    pub fn new(api_key: &str) -> Self {
        Self {
            api_key: api_key.into(),
            embed: Arc::new(default_embedding),
            reverse_order: false,
            fixed_embeddings: None,
            reply: Arc::new(|_| "mock reply".to_string()),
        }
    }

    pub fn embed_with(mut self, f: impl Fn(&str) -> Vec<f32> + Send + Sync + 'static) -> Self {
        self.embed = Arc::new(f);
        self
    }

    pub fn reversed(mut self) -> Self {
        self.reverse_order = true;
        self
    }

    pub fn fixed_embeddings(mut self, body: Value) -> Self {
        self.fixed_embeddings = Some(body);
        self
    }

    pub fn reply_with(mut self, f: impl Fn(&Value) -> String + Send + Sync + 'static) -> Self {
        self.reply = Arc::new(f);
        self
    }
}

/// Eight positive components derived from the text bytes.
pub fn default_embedding(text: &str) -> Vec<f32> {
    let sum: u32 = text.bytes().map(u32::from).sum();
    (0..8u32).map(|i| 1.0 + ((sum + i * 31) % 17) as f32).collect()
}

struct Shared {
    behavior: ProviderBehavior,
    requests: Mutex<Vec<RecordedRequest>>,
    injected: Mutex<VecDeque<u16>>,
}

pub struct MockProvider {
    served: Served,
    shared: Arc<Shared>,
}

impl MockProvider {
    pub async fn start(behavior: ProviderBehavior) -> Self {
        let shared = Arc::new(Shared {
            behavior,
            requests: Mutex::default(),
            injected: Mutex::default(),
        });
        let app = Router::new().fallback(handle).with_state(shared.clone());
        Self {
            served: Served::start(app).await,
            shared,
        }
    }

    /// Endpoint root including `/v1`.
    pub fn base_url(&self) -> String {
        format!("{}/v1", self.served.base_url())
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.shared.requests.lock().unwrap().clone()
    }

    /// Input counts of each embeddings request, in arrival order.
    pub fn embedding_batch_sizes(&self) -> Vec<usize> {
        self.requests()
            .iter()
            .filter(|r| r.path.ends_with("/embeddings"))
            .filter_map(|r| serde_json::from_slice::<Value>(&r.body).ok())
            .filter_map(|v| v["input"].as_array().map(Vec::len))
            .collect()
    }

    pub fn chat_request_count(&self) -> usize {
        self.requests()
            .iter()
            .filter(|r| r.path.ends_with("/chat/completions"))
            .count()
    }

    /// The next `n` requests are answered with `status` and `Retry-After: 0`.
    pub fn inject(&self, status: u16, n: usize) {
        self.shared
            .injected
            .lock()
            .unwrap()
            .extend(std::iter::repeat_n(status, n));
    }
}

async fn handle(
    State(shared): State<Arc<Shared>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    shared
        .requests
        .lock()
        .unwrap()
        .push(RecordedRequest::new(&method, &uri, &headers, body.to_vec()));

    if let Some(status) = shared.injected.lock().unwrap().pop_front() {
        let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        return (status, [("Retry-After", "0")], error_body("injected")).into_response();
    }
    let behavior = &shared.behavior;
    let expected = format!("Bearer {}", behavior.api_key);
    if headers.get("authorization").and_then(|v| v.to_str().ok()) != Some(expected.as_str()) {
        return (StatusCode::UNAUTHORIZED, error_body("Incorrect API key provided")).into_response();
    }
    if method != Method::POST {
        return StatusCode::METHOD_NOT_ALLOWED.into_response();
    }
    let Ok(request) = serde_json::from_slice::<Value>(&body) else {
        return (StatusCode::BAD_REQUEST, error_body("body is not JSON")).into_response();
    };

    match uri.path() {
        "/v1/embeddings" => {
            if let Some(fixed) = &behavior.fixed_embeddings {
                return axum::Json(fixed.clone()).into_response();
            }
            let inputs: Vec<String> = match &request["input"] {
                Value::String(s) => vec![s.clone()],
                Value::Array(a) => a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect(),
                _ => return (StatusCode::BAD_REQUEST, error_body("missing input")).into_response(),
            };
            let mut data: Vec<Value> = inputs
                .iter()
                .enumerate()
                .map(|(i, text)| json!({"object": "embedding", "index": i, "embedding": (behavior.embed)(text)}))
                .collect();
            if behavior.reverse_order {
                data.reverse();
            }
            axum::Json(json!({"object": "list", "data": data, "model": request["model"]})).into_response()
        }
        "/v1/chat/completions" => {
            let content = (behavior.reply)(&request["messages"]);
            axum::Json(json!({
                "object": "chat.completion",
                "model": request["model"],
                "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
            }))
            .into_response()
        }
        _ => (StatusCode::NOT_FOUND, error_body("unknown route")).into_response(),
    }
}

fn error_body(message: &str) -> axum::Json<Value> {
    axum::Json(json!({"error": {"message": message, "type": "mock_error"}}))
}
