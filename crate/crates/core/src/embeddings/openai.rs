use async_trait::async_trait;
use futures::stream::{self, StreamExt, TryStreamExt};
use reqwest::Client;
use serde::{Deserialize, Serialize};

use super::{EmbeddingVector, Embedder, check_uniform_dimension, validate_inputs};
use crate::provider::{ProviderConfig, ProviderError};
use crate::retry::{RetryPolicy, send_with_retry};
use crate::secret::Secret;

/// Largest number of inputs sent in one request.
pub const MAX_BATCH: usize = 100;

const DEFAULT_IN_FLIGHT: usize = 2;

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    index: usize,
    embedding: Vec<f32>,
}

/// Client for an OpenAI-compatible `POST /embeddings` endpoint.
#[derive(Debug, Clone)]
pub struct OpenAiEmbedder {
    http: Client,
    url: String,
    api_key: Secret,
    model: String,
    retry: RetryPolicy,
    max_in_flight: usize,
}

impl OpenAiEmbedder {
    pub fn new(cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        let http = Client::builder()
            .timeout(cfg.timeout())
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(Self {
            http,
            url: cfg.endpoint("embeddings"),
            api_key: cfg.api_key.clone(),
            model: cfg.embedding_model.clone(),
            retry: RetryPolicy::default(),
            max_in_flight: DEFAULT_IN_FLIGHT,
        })
    }

    pub fn with_retry_policy(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    async fn request(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let body = EmbeddingRequest {
            model: &self.model,
            input: texts,
        };
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
        let parsed: EmbeddingResponse =
            serde_json::from_str(&text).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        align(parsed.data, texts.len())
    }
}

/// Orders response items by `index` and checks every input got one vector.
fn align(mut data: Vec<EmbeddingDatum>, expected: usize) -> Result<Vec<EmbeddingVector>, ProviderError> {
    if data.len() != expected {
        return Err(ProviderError::Malformed(format!(
            "expected {expected} embeddings, got {}",
            data.len()
        )));
    }
    data.sort_by_key(|d| d.index);
    if data.iter().enumerate().any(|(i, d)| d.index != i) {
        return Err(ProviderError::Malformed("embedding indices are not 0..n".into()));
    }
    let vectors = data
        .into_iter()
        .map(|d| EmbeddingVector::new(d.embedding).map_err(|e| ProviderError::Malformed(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    check_uniform_dimension(&vectors)?;
    Ok(vectors)
}

#[async_trait]
impl Embedder for OpenAiEmbedder {
    fn model(&self) -> &str {
        &self.model
    }

    async fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        validate_inputs(texts)?;
        let requests: Vec<_> = texts.chunks(MAX_BATCH).map(|batch| self.request(batch)).collect();
        let batches: Vec<Vec<EmbeddingVector>> = stream::iter(requests)
            .buffered(self.max_in_flight)
            .try_collect()
            .await?;
        let vectors: Vec<EmbeddingVector> = batches.into_iter().flatten().collect();
        check_uniform_dimension(&vectors)?;
        Ok(vectors)
    }
}
