//! Embedding vectors, the cosine kernel, and the embedding providers.

pub(crate) mod mock;
mod openai;

use async_trait::async_trait;
use thiserror::Error;

use crate::provider::ProviderError;

pub use mock::{MOCK_DIMENSION, MockEmbedder, mock_embed, mock_embed_with_dimension};
pub use openai::{MAX_BATCH, OpenAiEmbedder};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VectorError {
    #[error("vector dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("vector contains a non-finite value")]
    NonFinite,
    #[error("vector must have at least one component")]
    Empty,
}

/// A fixed-dimension embedding with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, VectorError> {
        if values.is_empty() {
            return Err(VectorError::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VectorError::NonFinite);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// L2 norm, accumulated in f64.
    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }
}

impl TryFrom<Vec<f32>> for EmbeddingVector {
    type Error = VectorError;

    fn try_from(values: Vec<f32>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

/// Dot product of two equal-length slices, accumulated in f64.
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

/// `dot / (|a| |b|)` clamped to `[-1, 1]`, given precomputed norms.
pub(crate) fn cosine_with_norms(a: &[f32], a_norm: f64, b: &[f32], b_norm: f64) -> f64 {
    (dot(a, b) / (a_norm * b_norm)).clamp(-1.0, 1.0)
}

pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, VectorError> {
    if a.dimension() != b.dimension() {
        return Err(VectorError::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(VectorError::ZeroVector);
    }
    Ok(cosine_with_norms(a.values(), na, b.values(), nb))
}

/// Maps texts to vectors. Implementations keep the output aligned
/// index-for-index with the input.
#[async_trait]
pub trait Embedder: Send + Sync {
    /// Model identifier; the same embedder must serve ingestion and queries.
    fn model(&self) -> &str;

    async fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError>;

    async fn embed_one(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        let mut out = self.embed_batch(&[text.to_string()]).await?;
        out.pop()
            .ok_or_else(|| ProviderError::Malformed("empty embedding response".into()))
    }
}

pub(crate) fn validate_inputs(texts: &[String]) -> Result<(), ProviderError> {
    if texts.is_empty() {
        return Err(ProviderError::InvalidInput("no texts to embed".into()));
    }
    if let Some(i) = texts.iter().position(|t| t.is_empty()) {
        return Err(ProviderError::InvalidInput(format!("text {i} is empty")));
    }
    Ok(())
}

pub(crate) fn check_uniform_dimension(vectors: &[EmbeddingVector]) -> Result<(), ProviderError> {
    if let Some(first) = vectors.first() {
        let expected = first.dimension();
        if let Some(bad) = vectors.iter().find(|v| v.dimension() != expected) {
            return Err(ProviderError::DimensionMismatch {
                expected,
                found: bad.dimension(),
            });
        }
    }
    Ok(())
}
