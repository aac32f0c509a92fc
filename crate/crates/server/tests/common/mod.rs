#![allow(dead_code)]

use std::sync::{Arc, Mutex};
use std::time::Duration;

use kzb::AppState;
use kzb_core::{AppConfig, CannedChat, LibraryType, MockEmbedder, Providers, RetryPolicy};
use kzb_testkit::{MockZotero, corpus};
use reqwest::{Method, StatusCode};
use serde_json::Value;

pub const OPENAI_KEY: &str = "sk-openai-SENTINEL-5d2c81";

/// A running API server over a mock Zotero library, with every response
/// body kept for secret scanning.
pub struct Harness {
    pub base: String,
    pub zotero: MockZotero,
    pub chat: Arc<CannedChat>,
    pub http: reqwest::Client,
    pub bodies: Mutex<Vec<String>>,
    _dir: tempfile::TempDir,
    _server: tokio::task::JoinHandle<()>,
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: reqwest::header::HeaderMap,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.text))
    }

    pub fn error_code(&self) -> String {
        self.json()["error"]["code"].as_str().unwrap_or_default().to_string()
    }
}

impl Harness {
    pub async fn start() -> Self {
        Self::start_with_chat(CannedChat::new()).await
    }

    pub async fn start_with_chat(chat: CannedChat) -> Self {
        let zotero = MockZotero::start(vec![corpus::library()]).await;
        let dir = tempfile::tempdir().unwrap();
        let mut config = AppConfig {
            data_dir: dir.path().to_path_buf(),
            zotero_api_base: zotero.base_url(),
            ..AppConfig::default()
        };
        config.zotero.library_type = LibraryType::Group;
        config.zotero.library_id = corpus::GROUP_ID.into();
        config.zotero.api_key = corpus::API_KEY.into();
        config.provider.api_key = OPENAI_KEY.into();

        let chat = Arc::new(chat);
        let providers = Providers {
            embedder: Arc::new(MockEmbedder::default()),
            chat: chat.clone(),
        };
        let state = AppState::new(config)
            .unwrap()
            .with_providers(providers)
            .with_zotero_retry(RetryPolicy::fast());
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let server = tokio::spawn(async move {
            kzb::serve(Arc::new(state), listener, std::future::pending()).await.unwrap();
        });
        Self {
            base,
            zotero,
            chat,
            http: reqwest::Client::new(),
            bodies: Mutex::default(),
            _dir: dir,
            _server: server,
        }
    }

    pub async fn call(&self, method: Method, path: &str, body: Option<Value>) -> Reply {
        let mut req = self.http.request(method, format!("{}{}", self.base, path));
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let text = resp.text().await.unwrap();
        self.bodies.lock().unwrap().push(text.clone());
        Reply { status, headers, text }
    }

    pub async fn get(&self, path: &str) -> Reply {
        self.call(Method::GET, path, None).await
    }

    pub async fn post(&self, path: &str, body: Value) -> Reply {
        self.call(Method::POST, path, Some(body)).await
    }

    /// Starts ingestion and waits for it to leave `running`.
    pub async fn ingest(&self) -> Value {
        let r = self.call(Method::POST, "/api/ingest", None).await;
        assert_eq!(r.status, StatusCode::ACCEPTED, "{}", r.text);
        self.wait_for_ingest().await
    }

    pub async fn wait_for_ingest(&self) -> Value {
        for _ in 0..500 {
            let status = self.get("/api/ingest/status").await.json();
            if status["state"] != "running" {
                // The index swap follows the final status update.
                for _ in 0..100 {
                    let ready = status["state"] != "done" || self.get("/api/health").await.json()["index_size"] != 0;
                    if ready {
                        break;
                    }
                    tokio::time::sleep(Duration::from_millis(5)).await;
                }
                return status;
            }
            tokio::time::sleep(Duration::from_millis(10)).await;
        }
        panic!("ingest did not finish");
    }

    pub async fn new_session(&self) -> String {
        let r = self.call(Method::POST, "/api/sessions", None).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
        r.json()["session_id"].as_str().unwrap().to_string()
    }

    /// Every response body seen so far that contains any of `secrets`.
    pub fn leaks(&self, secrets: &[&str]) -> Vec<String> {
        self.bodies
            .lock()
            .unwrap()
            .iter()
            .filter(|b| secrets.iter().any(|s| b.contains(s)))
            .cloned()
            .collect()
    }
}
