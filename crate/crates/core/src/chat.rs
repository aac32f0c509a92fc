//! Chat-completion providers.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use async_trait::async_trait;
use reqwest::Client;
use serde::{Deserialize, Serialize};

use crate::embeddings::mock::words;
use crate::provider::{ProviderConfig, ProviderError};
use crate::rag::{QUESTION_PREFIX, REFUSAL_SENTENCE, SOURCE_PREFIX};
use crate::retry::{RetryPolicy, send_with_retry};
use crate::secret::Secret;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: MessageRole,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: MessageRole, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

#[async_trait]
pub trait ChatProvider: Send + Sync {
    /// Returns the assistant's reply to `messages`.
    async fn complete(&self, model: &str, messages: &[ChatMessage]) -> Result<String, ProviderError>;
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
}

#[derive(Deserialize)]
struct ReplyMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Client for an OpenAI-compatible `POST /chat/completions` endpoint.
/// Non-streaming.
#[derive(Debug, Clone)]
pub struct OpenAiChat {
    http: Client,
    url: String,
    api_key: Secret,
    retry: RetryPolicy,
}

impl OpenAiChat {
    pub fn new(cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        let http = Client::builder()
            .timeout(cfg.timeout())
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(Self {
            http,
            url: cfg.endpoint("chat/completions"),
            api_key: cfg.api_key.clone(),
            retry: RetryPolicy::default(),
        })
    }

    pub fn with_retry_policy(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }
}

#[async_trait]
impl ChatProvider for OpenAiChat {
    async fn complete(&self, model: &str, messages: &[ChatMessage]) -> Result<String, ProviderError> {
        let body = CompletionRequest { model, messages };
        let response = send_with_retry(&self.retry, || {
            self.http
                .post(&self.url)
                .bearer_auth(self.api_key.expose())
                .json(&body)
                .send()
        })
        .await
        .map_err(|e| ProviderError::transport(e, &self.api_key))?;
        let status = response.status();
        let text = response
            .text()
            .await
            .map_err(|e| ProviderError::transport(e, &self.api_key))?;
        if !status.is_success() {
            return Err(ProviderError::from_status(status, &text, &self.api_key));
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&text).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| ProviderError::Malformed("completion has no message content".into()))
    }
}

/// Deterministic stand-in for a chat model.
///
/// Reads the context block of the last user message and replies with the
/// sentence that contains the most distinct question words, preferring
/// higher-ranked sources on ties. With no overlapping sentence it replies
/// with the refusal sentence, as the system message instructs a real model.
#[derive(Debug, Default)]
pub struct CannedChat {
    calls: AtomicUsize,
    delay: Option<Duration>,
}

impl CannedChat {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sleeps before answering; used to widen race windows in tests.
    pub fn with_delay(delay: Duration) -> Self {
        Self {
            calls: AtomicUsize::new(0),
            delay: Some(delay),
        }
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// The reply for one user message built by [`crate::rag::build_prompt`].
    pub fn reply_to(prompt: &str) -> String {
        let (context, question) = match prompt.rfind(QUESTION_PREFIX) {
            Some(at) => (&prompt[..at], &prompt[at + QUESTION_PREFIX.len()..]),
            None => ("", prompt),
        };
        let question_words: HashSet<String> = words(question).collect();

        let mut best: Option<(usize, &str)> = None;
        for line in context.lines().filter(|l| !l.starts_with(SOURCE_PREFIX)) {
            for sentence in split_sentences(line) {
                let sentence_words: HashSet<String> = words(sentence).collect();
                let overlap = sentence_words.intersection(&question_words).count();
                if overlap > 0 && best.is_none_or(|(score, _)| overlap > score) {
                    best = Some((overlap, sentence));
                }
            }
        }
        best.map(|(_, s)| s.to_string())
            .unwrap_or_else(|| REFUSAL_SENTENCE.to_string())
    }
}

fn split_sentences(line: &str) -> impl Iterator<Item = &str> {
    line.split_inclusive(['.', '!', '?'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
}

#[async_trait]
impl ChatProvider for CannedChat {
    async fn complete(&self, _model: &str, messages: &[ChatMessage]) -> Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(delay) = self.delay {
            tokio::time::sleep(delay).await;
        }
        let prompt = messages
            .iter()
            .rev()
            .find(|m| m.role == MessageRole::User)
            .ok_or_else(|| ProviderError::InvalidInput("no user message".into()))?;
        Ok(Self::reply_to(&prompt.content))
    }
}
