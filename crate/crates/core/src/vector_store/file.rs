//! On-disk index format.
//!
//! ```text
//! "KZBVEC1\0"
//! u32 format version (1) | u32 dimension | u64 record count
//! per record:
//!   u16 len + chunk_id | u16 len + doc_id | u32 start | u32 end
//!   u32 len + text | dimension x f32
//! u32 CRC-32 (IEEE) of every preceding byte
//! ```
//! All integers and floats are little-endian; strings are UTF-8.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{IndexError, VectorIndex, VectorRecord};
use crate::embeddings::EmbeddingVector;

pub const MAGIC: &[u8; 8] = b"KZBVEC1\0";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 8 + 4 + 4 + 8;
const CRC_LEN: usize = 4;

impl VectorIndex {
    pub fn to_bytes(&self) -> Result<Vec<u8>, IndexError> {
        let dimension = self.dimension.unwrap_or(0);
        let mut out = Vec::with_capacity(HEADER_LEN + self.records.len() * (64 + dimension * 4));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&to_u32(dimension, "dimension")?.to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        for r in &self.records {
            put_str_u16(&mut out, &r.chunk_id, "chunk_id")?;
            put_str_u16(&mut out, &r.doc_id, "doc_id")?;
            out.extend_from_slice(&to_u32(r.start_offset, "start_offset")?.to_le_bytes());
            out.extend_from_slice(&to_u32(r.end_offset, "end_offset")?.to_le_bytes());
            out.extend_from_slice(&to_u32(r.text.len(), "text length")?.to_le_bytes());
            out.extend_from_slice(r.text.as_bytes());
            for v in r.vector.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        if bytes.len() < HEADER_LEN + CRC_LEN {
            return Err(corrupt("file shorter than header"));
        }
        if &bytes[..MAGIC.len()] != MAGIC {
            return Err(corrupt("bad magic bytes"));
        }
        let (body, crc_bytes) = bytes.split_at(bytes.len() - CRC_LEN);
        let stored_crc = u32::from_le_bytes(crc_bytes.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != stored_crc {
            return Err(corrupt("checksum mismatch"));
        }

        let mut cur = Cursor {
            buf: body,
            pos: MAGIC.len(),
        };
        let version = cur.u32()?;
        if version != FORMAT_VERSION {
            return Err(IndexError::VersionMismatch { found: version });
        }
        let dimension = cur.u32()? as usize;
        let count = cur.u64()?;
        if dimension == 0 && count > 0 {
            return Err(corrupt("records present but dimension is zero"));
        }

        let mut index = if dimension == 0 {
            VectorIndex::new()
        } else {
            VectorIndex::with_dimension(dimension)
        };
        let mut records = Vec::new();
        for _ in 0..count {
            let chunk_id = cur.string(2)?;
            let doc_id = cur.string(2)?;
            let start = cur.u32()? as usize;
            let end = cur.u32()? as usize;
            let text = cur.string(4)?;
            let raw = cur.take(dimension.checked_mul(4).ok_or_else(|| corrupt("dimension overflow"))?)?;
            let values: Vec<f32> = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
                .collect();
            let vector = EmbeddingVector::new(values).map_err(|e| corrupt(&e.to_string()))?;
            records.push(VectorRecord::new(chunk_id, doc_id, start, end, text, vector));
        }
        if cur.pos != body.len() {
            return Err(corrupt("trailing bytes after last record"));
        }
        let expected = records.len();
        index.upsert(records).map_err(|e| corrupt(&e.to_string()))?;
        if index.len() != expected {
            return Err(corrupt("duplicate chunk ids"));
        }
        Ok(index)
    }

    /// Writes the index atomically: a sibling temp file is synced, then
    /// renamed over `path`.
    pub fn persist(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        let path = path.as_ref();
        let bytes = self.to_bytes()?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
        tmp_name.push(".tmp");
        let tmp = path.with_file_name(tmp_name);
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IndexError> {
        Self::from_bytes(&fs::read(path)?)
    }
}

fn corrupt(msg: &str) -> IndexError {
    IndexError::CorruptIndex(msg.to_string())
}

fn to_u32(n: usize, what: &str) -> Result<u32, IndexError> {
    u32::try_from(n).map_err(|_| IndexError::InvalidRecord(format!("{what} exceeds u32")))
}

fn put_str_u16(out: &mut Vec<u8>, s: &str, what: &str) -> Result<(), IndexError> {
    let len = u16::try_from(s.len())
        .map_err(|_| IndexError::InvalidRecord(format!("{what} longer than 65535 bytes")))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| corrupt("truncated record"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self, len_width: usize) -> Result<String, IndexError> {
        let len = match len_width {
            2 => u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")) as usize,
            _ => self.u32()? as usize,
        };
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| corrupt("string is not UTF-8"))
    }
}
