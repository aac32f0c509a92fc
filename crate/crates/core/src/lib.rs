//! Grounded question answering over a Zotero PDF library.
//!
//! The pipeline reads PDF attachments from a Zotero user or group library,
//! extracts their text, splits it into overlapping character windows, embeds
//! each window, and stores the vectors in an exact cosine index. Questions are
//! answered by retrieving the closest windows and asking a chat model to
//! answer from those passages only, or to say it has no information.
//!
//! ```text
//! zotero ─▶ pdf ─▶ chunker ─▶ embeddings ─▶ vector_store
//!                                               │
//!                          question ─▶ rag ◀────┘ ─▶ session (CSV export)
//! ```

pub mod chat;
pub mod chunker;
pub mod config;
pub mod embeddings;
pub mod ingest;
pub mod pdf;
pub mod provider;
pub mod rag;
mod retry;
pub mod secret;
pub mod session;
pub mod vector_store;
pub mod zotero;

pub use chat::{CannedChat, ChatMessage, ChatProvider, MessageRole, OpenAiChat};
pub use chunker::{Chunk, ChunkError, ChunkingParams, chunk_text};
pub use config::{AppConfig, ConfigError};
pub use embeddings::{
    EmbeddingVector, Embedder, MockEmbedder, OpenAiEmbedder, VectorError, cosine_similarity,
    mock_embed,
};
pub use ingest::{IngestError, IngestState, IngestStatus, Ingestor};
pub use pdf::{ExtractError, ExtractedDocument, extract_text};
pub use provider::{ProviderConfig, ProviderError, ProviderMode, Providers};
pub use rag::{
    Answer, REFUSAL_SENTENCE, RagEngine, RagError, RagParams, build_prompt, default_system_message,
};
pub use retry::RetryPolicy;
pub use secret::Secret;
pub use session::{ChatTurn, Session, SessionError, SessionStore, TurnRole};
pub use vector_store::{IndexError, SearchHit, VectorIndex, VectorRecord};
pub use zotero::{ItemRecord, LibraryDescriptor, LibraryType, ZoteroClient, ZoteroError};
