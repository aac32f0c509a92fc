use async_trait::async_trait;

use super::{EmbeddingVector, Embedder, validate_inputs};
use crate::provider::ProviderError;

pub const MOCK_DIMENSION: usize = 64;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a, fixed across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Lowercased maximal alphanumeric runs.
pub(crate) fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// Deterministic bag-of-words embedding in [`MOCK_DIMENSION`] dimensions.
pub fn mock_embed(text: &str) -> EmbeddingVector {
    mock_embed_with_dimension(text, MOCK_DIMENSION)
}

/// Each word adds 1.0 at `fnv1a(word) mod dimension`; the result is
/// L2-normalized. Text with no words maps to the unit vector e0.
///
/// # Panics
/// If `dimension < 2`.
pub fn mock_embed_with_dimension(text: &str, dimension: usize) -> EmbeddingVector {
    assert!(dimension >= 2, "mock embedding dimension must be at least 2");
    let mut counts = vec![0f64; dimension];
    for word in words(text) {
        counts[(fnv1a(word.as_bytes()) % dimension as u64) as usize] += 1.0;
    }
    let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
    let values = if norm == 0.0 {
        let mut e0 = vec![0f32; dimension];
        e0[0] = 1.0;
        e0
    } else {
        counts.iter().map(|c| (c / norm) as f32).collect()
    };
    EmbeddingVector { values }
}

/// Offline embedder backed by [`mock_embed_with_dimension`].
#[derive(Debug, Clone)]
pub struct MockEmbedder {
    dimension: usize,
    model: String,
}

impl Default for MockEmbedder {
    fn default() -> Self {
        Self::new(MOCK_DIMENSION)
    }
}

impl MockEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 2, "mock embedding dimension must be at least 2");
        Self {
            dimension,
            model: format!("mock-bow-{dimension}"),
        }
    }
}

#[async_trait]
impl Embedder for MockEmbedder {
    fn model(&self) -> &str {
        &self.model
    }

    async fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        validate_inputs(texts)?;
        Ok(texts
            .iter()
            .map(|t| mock_embed_with_dimension(t, self.dimension))
            .collect())
    }
}
