//! In-process mock of the read-only Zotero Web API v3 subset.
//!
//! Serves `GET /{users|groups}/{id}[/collections/{cid}]/items` with
//! `start`/`limit` paging and a `Total-Results` header, and
//! `GET /{users|groups}/{id}/items/{key}/file`. Every request is logged,
//! whatever its method.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::Router;
use axum::extract::{Query, State};
use axum::http::{HeaderMap, HeaderValue, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use serde_json::{Value, json};

use crate::server::{RecordedRequest, Served};

pub const PDF: &str = "application/pdf";

#[derive(Debug, Clone)]
pub struct MockItem {
    pub key: String,
    pub item_type: String,
    pub title: String,
    pub parent: Option<String>,
    pub content_type: Option<String>,
    pub filename: Option<String>,
    pub file: Option<Vec<u8>>,
}

impl MockItem {
    pub fn pdf(key: &str, title: &str, bytes: Vec<u8>) -> Self {
        Self::attachment(key, title, PDF, bytes)
    }

    pub fn attachment(key: &str, title: &str, content_type: &str, bytes: Vec<u8>) -> Self {
        Self {
            key: key.into(),
            item_type: "attachment".into(),
            title: title.into(),
            parent: None,
            content_type: Some(content_type.into()),
            filename: Some(format!("{}.bin", key.to_lowercase())),
            file: Some(bytes),
        }
    }

    pub fn note(key: &str) -> Self {
        Self {
            key: key.into(),
            item_type: "note".into(),
            title: String::new(),
            parent: None,
            content_type: None,
            filename: None,
            file: None,
        }
    }

    pub fn article(key: &str, title: &str) -> Self {
        Self {
            key: key.into(),
            item_type: "journalArticle".into(),
            title: title.into(),
            parent: None,
            content_type: None,
            filename: None,
            file: None,
        }
    }

    pub fn with_parent(mut self, parent: &str) -> Self {
        self.parent = Some(parent.into());
        self
    }

    fn to_json(&self, library: &str) -> Value {
        let mut data = json!({
            "key": self.key,
            "version": 1,
            "itemType": self.item_type,
            "title": self.title,
        });
        if let Some(p) = &self.parent {
            data["parentItem"] = json!(p);
        }
        if let Some(c) = &self.content_type {
            data["contentType"] = json!(c);
            data["linkMode"] = json!("imported_file");
        }
        if let Some(f) = &self.filename {
            data["filename"] = json!(f);
        }
        json!({
            "key": self.key,
            "version": 1,
            "library": { "type": library.trim_end_matches('s'), "id": 0 },
            "data": data,
        })
    }
}

/// One library: path prefix such as `groups/2515542`, the key that may read
/// it, its items, and named collections (lists of item keys).
#[derive(Debug, Clone)]
pub struct MockLibrary {
    pub path: String,
    pub api_key: String,
    pub items: Vec<MockItem>,
    pub collections: HashMap<String, Vec<String>>,
}

impl MockLibrary {
    pub fn group(id: &str, api_key: &str) -> Self {
        Self::new(format!("groups/{id}"), api_key)
    }

    pub fn user(id: &str, api_key: &str) -> Self {
        Self::new(format!("users/{id}"), api_key)
    }

    fn new(path: String, api_key: &str) -> Self {
        Self {
            path,
            api_key: api_key.into(),
            items: Vec::new(),
            collections: HashMap::new(),
        }
    }

    pub fn item(mut self, item: MockItem) -> Self {
        self.items.push(item);
        self
    }

    pub fn items(mut self, items: impl IntoIterator<Item = MockItem>) -> Self {
        self.items.extend(items);
        self
    }

    pub fn collection(mut self, id: &str, keys: &[&str]) -> Self {
        self.collections
            .insert(id.into(), keys.iter().map(|k| k.to_string()).collect());
        self
    }
}

#[derive(Default)]
struct Shared {
    libraries: Vec<MockLibrary>,
    requests: Mutex<Vec<RecordedRequest>>,
    /// Statuses to return (with `Retry-After: 0`) before normal handling.
    injected: Mutex<VecDeque<u16>>,
    delay: Mutex<Option<Duration>>,
}

/// A running mock; stops when dropped.
pub struct MockZotero {
    served: Served,
    shared: Arc<Shared>,
}

impl MockZotero {
    pub async fn start(libraries: Vec<MockLibrary>) -> Self {
        let shared = Arc::new(Shared {
            libraries,
            ..Shared::default()
        });
        let app = Router::new().fallback(handle).with_state(shared.clone());
        Self {
            served: Served::start(app).await,
            shared,
        }
    }

    pub fn base_url(&self) -> String {
        self.served.base_url()
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.shared.requests.lock().unwrap().clone()
    }

    /// Sleeps this long before answering each request.
    pub fn set_delay(&self, delay: Option<Duration>) {
        *self.shared.delay.lock().unwrap() = delay;
    }

    /// The next `n` requests are answered with `status` instead.
    pub fn inject(&self, status: u16, n: usize) {
        let mut q = self.shared.injected.lock().unwrap();
        q.extend(std::iter::repeat_n(status, n));
    }
}

async fn handle(
    State(shared): State<Arc<Shared>>,
    Query(query): Query<HashMap<String, String>>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
) -> Response {
    shared
        .requests
        .lock()
        .unwrap()
        .push(RecordedRequest::new(&method, &uri, &headers, Vec::new()));

    let delay = *shared.delay.lock().unwrap();
    if let Some(delay) = delay {
        tokio::time::sleep(delay).await;
    }
    if let Some(status) = shared.injected.lock().unwrap().pop_front() {
        let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        return (status, [("Retry-After", "0")], "injected").into_response();
    }
    if method != Method::GET {
        return (StatusCode::METHOD_NOT_ALLOWED, "read-only mock").into_response();
    }

    let segments: Vec<&str> = uri.path().trim_matches('/').split('/').collect();
    if segments.len() < 3 {
        return StatusCode::NOT_FOUND.into_response();
    }
    let prefix = format!("{}/{}", segments[0], segments[1]);
    let Some(library) = shared.libraries.iter().find(|l| l.path == prefix) else {
        return StatusCode::NOT_FOUND.into_response();
    };
    let key = headers.get("Zotero-API-Key").and_then(|v| v.to_str().ok());
    if key != Some(library.api_key.as_str()) {
        return (StatusCode::FORBIDDEN, "Invalid key").into_response();
    }

    match &segments[2..] {
        ["items"] => list(library, library.items.iter().collect(), &query),
        ["collections", cid, "items"] => match library.collections.get(*cid) {
            Some(keys) => {
                let items = library.items.iter().filter(|i| keys.contains(&i.key)).collect();
                list(library, items, &query)
            }
            None => StatusCode::NOT_FOUND.into_response(),
        },
        ["items", key, "file"] => match library.items.iter().find(|i| i.key == *key).and_then(|i| i.file.clone()) {
            Some(bytes) => ([("Content-Type", "application/octet-stream")], bytes).into_response(),
            None => StatusCode::NOT_FOUND.into_response(),
        },
        _ => StatusCode::NOT_FOUND.into_response(),
    }
}

fn list(library: &MockLibrary, items: Vec<&MockItem>, query: &HashMap<String, String>) -> Response {
    let start: usize = query.get("start").and_then(|s| s.parse().ok()).unwrap_or(0);
    let limit: usize = query
        .get("limit")
        .and_then(|s| s.parse().ok())
        .unwrap_or(25)
        .clamp(1, 100);
    let kind = library.path.split('/').next().unwrap_or("users");
    let page: Vec<Value> = items.iter().skip(start).take(limit).map(|i| i.to_json(kind)).collect();
    let mut response = axum::Json(page).into_response();
    response
        .headers_mut()
        .insert("Total-Results", HeaderValue::from(items.len()));
    response
}
