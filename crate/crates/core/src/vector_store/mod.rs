//! Exact cosine index over embedded chunks.
//!
//! Search is an exhaustive scan: every record is scored, so results match a
//! naive reference scan exactly. Libraries of a few thousand chunks scan in
//! well under a millisecond per query.

mod file;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunker::Chunk;
use crate::embeddings::{EmbeddingVector, cosine_with_norms};

pub use file::{FORMAT_VERSION, MAGIC};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("vector dimension {found} does not match index dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index is empty")]
    EmptyIndex,
    #[error("zero vector cannot be indexed or searched")]
    ZeroVector,
    #[error("k must be positive")]
    InvalidK,
    #[error("record cannot be stored: {0}")]
    InvalidRecord(String),
    #[error("index file is corrupt: {0}")]
    CorruptIndex(String),
    #[error("unsupported index format version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("index I/O failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorRecord {
    pub chunk_id: String,
    pub doc_id: String,
    pub start_offset: usize,
    pub end_offset: usize,
    pub text: String,
    pub vector: EmbeddingVector,
    /// `‖vector‖₂`, cached for scoring.
    pub norm: f64,
}

impl VectorRecord {
    pub fn new(
        chunk_id: impl Into<String>,
        doc_id: impl Into<String>,
        start_offset: usize,
        end_offset: usize,
        text: impl Into<String>,
        vector: EmbeddingVector,
    ) -> Self {
        let norm = vector.norm();
        Self {
            chunk_id: chunk_id.into(),
            doc_id: doc_id.into(),
            start_offset,
            end_offset,
            text: text.into(),
            vector,
            norm,
        }
    }

    pub fn from_chunk(chunk: Chunk, vector: EmbeddingVector) -> Self {
        Self::new(
            chunk.chunk_id,
            chunk.doc_id,
            chunk.start_offset,
            chunk.end_offset,
            chunk.text,
            vector,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub chunk_id: String,
    pub doc_id: String,
    pub score: f64,
    pub text: String,
}

/// Descending score, then ascending chunk id.
pub fn hit_order(a_score: f64, a_id: &str, b_score: f64, b_id: &str) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_id.cmp(b_id))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VectorIndex {
    dimension: Option<usize>,
    records: Vec<VectorRecord>,
    positions: HashMap<String, usize>,
}

impl VectorIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// An empty index that only accepts `dimension`-long vectors.
    pub fn with_dimension(dimension: usize) -> Self {
        Self {
            dimension: Some(dimension),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    /// Records in insertion order.
    pub fn records(&self) -> &[VectorRecord] {
        &self.records
    }

    pub fn get(&self, chunk_id: &str) -> Option<&VectorRecord> {
        self.positions.get(chunk_id).map(|&i| &self.records[i])
    }

    pub fn contains(&self, chunk_id: &str) -> bool {
        self.positions.contains_key(chunk_id)
    }

    /// Inserts new records and replaces ones whose chunk id already exists.
    ///
    /// The first insert fixes the index dimension. The batch is validated up
    /// front, so on error nothing is applied. Returns the number of records
    /// inserted or replaced.
    pub fn upsert(&mut self, records: Vec<VectorRecord>) -> Result<usize, IndexError> {
        let dimension = self
            .dimension
            .or_else(|| records.first().map(|r| r.vector.dimension()));
        if let Some(expected) = dimension {
            for r in &records {
                if r.vector.dimension() != expected {
                    return Err(IndexError::DimensionMismatch {
                        expected,
                        found: r.vector.dimension(),
                    });
                }
                if r.norm == 0.0 {
                    return Err(IndexError::ZeroVector);
                }
            }
        }
        self.dimension = dimension;

        let count = records.len();
        for record in records {
            match self.positions.get(&record.chunk_id) {
                Some(&i) => self.records[i] = record,
                None => {
                    self.positions.insert(record.chunk_id.clone(), self.records.len());
                    self.records.push(record);
                }
            }
        }
        Ok(count)
    }

    /// The `min(k, len)` records most cosine-similar to `query`.
    pub fn search(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<SearchHit>, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        let Some(dimension) = self.dimension.filter(|_| !self.records.is_empty()) else {
            return Err(IndexError::EmptyIndex);
        };
        if query.dimension() != dimension {
            return Err(IndexError::DimensionMismatch {
                expected: dimension,
                found: query.dimension(),
            });
        }
        let query_norm = query.norm();
        if query_norm == 0.0 {
            return Err(IndexError::ZeroVector);
        }

        let mut scored: Vec<(f64, &VectorRecord)> = self
            .records
            .iter()
            .map(|r| (cosine_with_norms(query.values(), query_norm, r.vector.values(), r.norm), r))
            .collect();
        let cmp = |a: &(f64, &VectorRecord), b: &(f64, &VectorRecord)| {
            hit_order(a.0, &a.1.chunk_id, b.0, &b.1.chunk_id)
        };
        let k = k.min(scored.len());
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_by(cmp);

        Ok(scored
            .into_iter()
            .map(|(score, r)| SearchHit {
                chunk_id: r.chunk_id.clone(),
                doc_id: r.doc_id.clone(),
                score,
                text: r.text.clone(),
            })
            .collect())
    }
}
