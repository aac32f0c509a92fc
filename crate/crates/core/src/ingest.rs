//! Library → index pipeline:
//! list attachments, download, extract, chunk, embed, upsert, persist.
//!
//! A document that fails at any stage is recorded and skipped; the run fails
//! only when no document makes it into the index.

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chunker::{Chunk, ChunkingParams, chunk_text};
use crate::config::AppConfig;
use crate::embeddings::Embedder;
use crate::pdf::{self, ExtractedDocument};
use crate::vector_store::{IndexError, VectorIndex, VectorRecord};
use crate::zotero::{LibraryDescriptor, ZoteroClient, ZoteroError};

pub const DEFAULT_DOWNLOAD_CONCURRENCY: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IngestState {
    #[default]
    Idle,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStatus {
    pub state: IngestState,
    /// PDF (or local) documents discovered.
    pub docs_found: usize,
    /// Documents fully indexed.
    pub docs_extracted: usize,
    /// Documents dropped at some stage; see `errors`.
    pub docs_skipped: usize,
    /// Non-PDF attachments ignored during listing.
    pub non_pdf_attachments: usize,
    pub chunks_indexed: usize,
    pub errors: Vec<String>,
}

/// Shared view of a running ingest, for progress polling.
#[derive(Debug, Clone, Default)]
pub struct StatusHandle(Arc<Mutex<IngestStatus>>);

impl StatusHandle {
    pub fn snapshot(&self) -> IngestStatus {
        self.0.lock().expect("status poisoned").clone()
    }

    pub fn update(&self, f: impl FnOnce(&mut IngestStatus)) {
        f(&mut self.0.lock().expect("status poisoned"));
    }

    pub fn reset(&self) {
        self.update(|s| *s = IngestStatus::default());
    }

    /// Moves to `running` with fresh counters unless a run is in progress.
    pub fn try_start(&self) -> bool {
        let mut status = self.0.lock().expect("status poisoned");
        if status.state == IngestState::Running {
            return false;
        }
        *status = IngestStatus {
            state: IngestState::Running,
            ..IngestStatus::default()
        };
        true
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("listing the library failed: {0}")]
    Listing(#[from] ZoteroError),
    #[error("no document could be indexed ({0} errors)")]
    NoDocuments(usize),
    #[error("cannot read local source: {0}")]
    Source(#[from] std::io::Error),
    #[error("index error: {0}")]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SourceKind {
    Pdf,
    Text,
}

/// A document found in a source, not yet fetched.
#[derive(Debug, Clone)]
struct SourceDoc {
    doc_id: String,
    title: String,
    kind: SourceKind,
    location: Location,
}

#[derive(Debug, Clone)]
enum Location {
    Zotero,
    File(PathBuf),
}

pub struct Ingestor {
    zotero: ZoteroClient,
    embedder: Arc<dyn Embedder>,
    chunking: ChunkingParams,
    concurrency: usize,
    status: StatusHandle,
}

impl std::fmt::Debug for Ingestor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ingestor")
            .field("zotero", &self.zotero.base_url())
            .field("embedding_model", &self.embedder.model())
            .field("chunking", &self.chunking)
            .finish_non_exhaustive()
    }
}

impl Ingestor {
    pub fn new(zotero: ZoteroClient, embedder: Arc<dyn Embedder>, chunking: ChunkingParams) -> Self {
        Self {
            zotero,
            embedder,
            chunking,
            concurrency: DEFAULT_DOWNLOAD_CONCURRENCY,
            status: StatusHandle::default(),
        }
    }

    /// Ingestor for `config`'s Zotero endpoint and chunking settings.
    pub fn from_config(config: &AppConfig, embedder: Arc<dyn Embedder>) -> Self {
        Self::new(ZoteroClient::new(&config.zotero_api_base), embedder, config.chunking)
    }

    pub fn with_status(mut self, status: StatusHandle) -> Self {
        self.status = status;
        self
    }

    pub fn with_concurrency(mut self, n: usize) -> Self {
        self.concurrency = n.max(1);
        self
    }

    pub fn status(&self) -> &StatusHandle {
        &self.status
    }

    /// Builds a fresh index from every PDF attachment in the library and
    /// writes it to `index_path`.
    pub async fn ingest_zotero(&self, desc: &LibraryDescriptor, index_path: &Path) -> Result<VectorIndex, IngestError> {
        self.begin();
        let scan = match self.zotero.scan_attachments(desc).await {
            Ok(scan) => scan,
            Err(err) => return Err(self.fail(IngestError::Listing(err))),
        };
        let docs = scan
            .pdfs
            .into_iter()
            .map(|item| SourceDoc {
                doc_id: item.item_key,
                title: item.title,
                kind: SourceKind::Pdf,
                location: Location::Zotero,
            })
            .collect();
        self.status.update(|s| s.non_pdf_attachments = scan.other_attachments);
        self.run(docs, Some(desc), index_path).await
    }

    /// Same pipeline over `.pdf` and `.txt` files in `dir` (not recursive).
    /// Document ids are derived from file content.
    pub async fn ingest_dir(&self, dir: &Path, index_path: &Path) -> Result<VectorIndex, IngestError> {
        self.begin();
        let docs = match local_docs(dir) {
            Ok(docs) => docs,
            Err(err) => return Err(self.fail(IngestError::Source(err))),
        };
        self.run(docs, None, index_path).await
    }

    fn begin(&self) {
        self.status.update(|s| {
            *s = IngestStatus {
                state: IngestState::Running,
                ..IngestStatus::default()
            }
        });
    }

    fn fail(&self, err: IngestError) -> IngestError {
        let message = err.to_string();
        self.status.update(|s| {
            s.state = IngestState::Failed;
            s.errors.push(message);
        });
        err
    }

    fn skip(&self, doc_id: &str, reason: impl std::fmt::Display) {
        tracing::warn!(doc_id, %reason, "skipping document");
        let line = format!("{doc_id}: {reason}");
        self.status.update(|s| {
            s.docs_skipped += 1;
            s.errors.push(line);
        });
    }

    async fn run(
        &self,
        docs: Vec<SourceDoc>,
        desc: Option<&LibraryDescriptor>,
        index_path: &Path,
    ) -> Result<VectorIndex, IngestError> {
        self.status.update(|s| s.docs_found = docs.len());

        let extracted: Vec<(SourceDoc, Result<Vec<Chunk>, String>)> = stream::iter(docs)
            .map(|doc| async move {
                let chunks = self.fetch_and_chunk(&doc, desc).await;
                (doc, chunks)
            })
            .buffered(self.concurrency)
            .collect()
            .await;

        let mut index = VectorIndex::new();
        for (doc, chunks) in extracted {
            let chunks = match chunks {
                Ok(chunks) => chunks,
                Err(reason) => {
                    self.skip(&doc.doc_id, reason);
                    continue;
                }
            };
            let texts: Vec<String> = chunks.iter().map(|c| c.text.clone()).collect();
            let vectors = match self.embedder.embed_batch(&texts).await {
                Ok(v) => v,
                Err(err) => {
                    self.skip(&doc.doc_id, format!("embedding failed: {err}"));
                    continue;
                }
            };
            let records: Vec<VectorRecord> = chunks
                .into_iter()
                .zip(vectors)
                .map(|(chunk, vector)| VectorRecord::from_chunk(chunk, vector))
                .collect();
            match index.upsert(records) {
                Ok(_) => self.status.update(|s| {
                    s.docs_extracted += 1;
                    s.chunks_indexed = index.len();
                }),
                Err(err) => self.skip(&doc.doc_id, err),
            }
        }

        if self.status.snapshot().docs_extracted == 0 {
            let errors = self.status.snapshot().errors.len();
            return Err(self.fail(IngestError::NoDocuments(errors)));
        }
        if let Err(err) = index.persist(index_path) {
            return Err(self.fail(err.into()));
        }
        self.status.update(|s| s.state = IngestState::Done);
        Ok(index)
    }

    async fn fetch_and_chunk(&self, doc: &SourceDoc, desc: Option<&LibraryDescriptor>) -> Result<Vec<Chunk>, String> {
        let bytes = match (&doc.location, desc) {
            (Location::Zotero, Some(desc)) => self
                .zotero
                .download_attachment(desc, &doc.doc_id)
                .await
                .map_err(|e| format!("download failed: {e}"))?,
            (Location::File(path), _) => tokio::fs::read(path).await.map_err(|e| format!("read failed: {e}"))?,
            (Location::Zotero, None) => return Err("no library to download from".into()),
        };
        let (doc_id, title, kind) = (doc.doc_id.clone(), doc.title.clone(), doc.kind);
        let extracted = tokio::task::spawn_blocking(move || match kind {
            SourceKind::Pdf => pdf::extract_text(&bytes, &doc_id, &title),
            SourceKind::Text => pdf::plain_text_document(&bytes, &doc_id, &title),
        })
        .await
        .map_err(|e| format!("extraction task failed: {e}"))?;
        let ExtractedDocument { doc_id, text, .. } = extracted.map_err(|e| e.to_string())?;
        chunk_text(&text, &doc_id, self.chunking).map_err(|e| e.to_string())
    }
}

fn local_docs(dir: &Path) -> std::io::Result<Vec<SourceDoc>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut docs = Vec::new();
    for path in paths {
        let kind = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("pdf") => SourceKind::Pdf,
            Some("txt") => SourceKind::Text,
            _ => continue,
        };
        let bytes = std::fs::read(&path)?;
        docs.push(SourceDoc {
            doc_id: content_id(&bytes),
            title: path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string(),
            kind,
            location: Location::File(path),
        });
    }
    Ok(docs)
}

/// First 16 hex digits of the SHA-256 of a file's bytes.
pub fn content_id(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
