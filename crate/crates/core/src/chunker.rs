//! Fixed-size, overlapping character windows.
//!
//! Windows start at `0, s, 2s, ...` with stride `s = chunk_size - chunk_overlap`
//! and stop at the first window that reaches the end of the text. Offsets
//! count Unicode scalar values, so a window never splits a character.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_CHUNK_SIZE: usize = 3000;
pub const DEFAULT_CHUNK_OVERLAP: usize = 300;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChunkError {
    #[error("invalid chunking params: chunk_size={chunk_size}, chunk_overlap={chunk_overlap} (need 0 <= overlap < size)")]
    InvalidParams { chunk_size: usize, chunk_overlap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkingParams {
    pub chunk_size: usize,
    pub chunk_overlap: usize,
}

impl Default for ChunkingParams {
    fn default() -> Self {
        Self {
            chunk_size: DEFAULT_CHUNK_SIZE,
            chunk_overlap: DEFAULT_CHUNK_OVERLAP,
        }
    }
}

impl ChunkingParams {
    pub fn new(chunk_size: usize, chunk_overlap: usize) -> Result<Self, ChunkError> {
        let params = Self {
            chunk_size,
            chunk_overlap,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ChunkError> {
        if self.chunk_size == 0 || self.chunk_overlap >= self.chunk_size {
            return Err(ChunkError::InvalidParams {
                chunk_size: self.chunk_size,
                chunk_overlap: self.chunk_overlap,
            });
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.chunk_size - self.chunk_overlap
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub ordinal: usize,
    /// Inclusive start, in characters.
    pub start_offset: usize,
    /// Exclusive end, in characters.
    pub end_offset: usize,
    pub text: String,
}

pub fn chunk_id(doc_id: &str, ordinal: usize) -> String {
    format!("{doc_id}#{ordinal}")
}

pub fn chunk_text(text: &str, doc_id: &str, params: ChunkingParams) -> Result<Vec<Chunk>, ChunkError> {
    params.validate()?;
    // Byte position of every char boundary, including the end of the string.
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let char_len = bounds.len() - 1;
    if char_len == 0 {
        return Ok(Vec::new());
    }

    let stride = params.stride();
    let mut chunks = Vec::with_capacity(char_len.div_ceil(stride));
    let mut start = 0;
    loop {
        let end = (start + params.chunk_size).min(char_len);
        let ordinal = chunks.len();
        chunks.push(Chunk {
            chunk_id: chunk_id(doc_id, ordinal),
            doc_id: doc_id.to_string(),
            ordinal,
            start_offset: start,
            end_offset: end,
            text: text[bounds[start]..bounds[end]].to_string(),
        });
        if end == char_len {
            break;
        }
        start += stride;
    }
    Ok(chunks)
}
