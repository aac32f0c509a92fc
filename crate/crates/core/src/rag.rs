//! Retrieve-then-read answering.
//!
//! A question is embedded with the same embedder used at ingestion, the
//! top-k chunks are retrieved, and a prompt is assembled from the system
//! message, recent history, and the retrieved passages. If even the best
//! passage scores below the similarity floor, the fixed refusal sentence is
//! returned without calling the chat model.

use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chat::{ChatMessage, MessageRole};
use crate::embeddings::EmbeddingVector;
use crate::provider::{ProviderError, Providers};
use crate::session::{ChatTurn, TurnRole};
use crate::vector_store::{IndexError, SearchHit, VectorIndex};

pub const REFUSAL_SENTENCE: &str = "I apologize, but I do not have any information about it in my Zotero library.";

const SYSTEM_MESSAGE: &str = "You are KnimeZoBot, an AI assistant specifically designed to seamlessly integrate the power of the KNIME platform with the vast knowledge stored within your Zotero library. Your mission is to provide the user with a unique and efficient way to access information, answer questions, and streamline users' research tasks by tapping into your personal Zotero library. Get the answer only from the provided information and if it is not store there write \"I apologize, but I do not have any information about it in my Zotero library.\"";

pub(crate) const SOURCE_PREFIX: &str = "[source: ";
pub(crate) const QUESTION_PREFIX: &str = "Question: ";

/// The grounding system message, verbatim.
pub fn default_system_message() -> &'static str {
    SYSTEM_MESSAGE
}

#[derive(Debug, Error)]
pub enum RagError {
    #[error("question must not be empty")]
    EmptyQuestion,
    #[error("no passages to build a prompt from")]
    EmptyContext,
    #[error("index is empty; run ingestion first")]
    EmptyIndex,
    #[error("invalid retrieval parameters: {0}")]
    InvalidParams(String),
    #[error("embedding the question failed: {0}")]
    Embedding(#[source] ProviderError),
    #[error("chat completion failed: {0}")]
    Chat(#[source] ProviderError),
    #[error("retrieval failed: {0}")]
    Index(#[source] IndexError),
}

impl From<IndexError> for RagError {
    fn from(err: IndexError) -> Self {
        match err {
            IndexError::EmptyIndex => RagError::EmptyIndex,
            other => RagError::Index(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RagParams {
    pub top_k: usize,
    /// Best-hit cosine below this refuses without calling the model.
    /// Zero disables the floor.
    pub similarity_floor: f64,
    pub max_history_turns: usize,
    pub system_message: String,
    /// Overrides the provider's chat model when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chat_model: Option<String>,
}

impl Default for RagParams {
    fn default() -> Self {
        Self {
            top_k: 5,
            similarity_floor: 0.25,
            max_history_turns: 10,
            system_message: SYSTEM_MESSAGE.to_string(),
            chat_model: None,
        }
    }
}

impl RagParams {
    pub fn validate(&self) -> Result<(), RagError> {
        if self.top_k == 0 {
            return Err(RagError::InvalidParams("top_k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.similarity_floor) {
            return Err(RagError::InvalidParams("similarity_floor must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    /// Passages given to the model; empty when refused.
    pub citations: Vec<SearchHit>,
    pub refused: bool,
    pub question: String,
    pub created_at: DateTime<Utc>,
}

impl Answer {
    pub fn citation_ids(&self) -> Vec<String> {
        self.citations.iter().map(|h| h.chunk_id.clone()).collect()
    }
}

/// `[system] ++ last max_history_turns turns ++ [user: passages + question]`.
///
/// Each passage renders as `[source: <chunk_id>]` on its own line followed
/// by its text, in the given (score) order.
pub fn build_prompt(
    question: &str,
    hits: &[SearchHit],
    history: &[ChatTurn],
    params: &RagParams,
) -> Result<Vec<ChatMessage>, RagError> {
    if hits.is_empty() {
        return Err(RagError::EmptyContext);
    }
    let recent = &history[history.len().saturating_sub(params.max_history_turns)..];
    let mut messages = Vec::with_capacity(recent.len() + 2);
    messages.push(ChatMessage::new(MessageRole::System, params.system_message.clone()));
    messages.extend(recent.iter().map(|turn| {
        let role = match turn.role {
            TurnRole::User => MessageRole::User,
            TurnRole::Assistant => MessageRole::Assistant,
        };
        ChatMessage::new(role, turn.content.clone())
    }));

    let mut context = String::new();
    for hit in hits {
        context.push_str(SOURCE_PREFIX);
        context.push_str(&hit.chunk_id);
        context.push_str("]\n");
        context.push_str(&hit.text);
        context.push_str("\n\n");
    }
    context.push_str(QUESTION_PREFIX);
    context.push_str(question);
    messages.push(ChatMessage::new(MessageRole::User, context));
    Ok(messages)
}

type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

/// Answers questions against an index with a fixed pair of providers.
#[derive(Clone)]
pub struct RagEngine {
    providers: Providers,
    default_chat_model: String,
    clock: Clock,
}

impl std::fmt::Debug for RagEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RagEngine")
            .field("providers", &self.providers)
            .field("default_chat_model", &self.default_chat_model)
            .finish_non_exhaustive()
    }
}

impl RagEngine {
    pub fn new(providers: Providers, default_chat_model: impl Into<String>) -> Self {
        Self {
            providers,
            default_chat_model: default_chat_model.into(),
            clock: Arc::new(Utc::now),
        }
    }

    /// Replaces the timestamp source; used for byte-stable answers in tests.
    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Self {
        self.clock = Arc::new(clock);
        self
    }

    pub fn providers(&self) -> &Providers {
        &self.providers
    }

    pub async fn embed_question(&self, question: &str) -> Result<EmbeddingVector, RagError> {
        self.providers
            .embedder
            .embed_one(question)
            .await
            .map_err(RagError::Embedding)
    }

    /// Answers `question` given the prior turns of its session.
    ///
    /// The caller records the exchange in the session store.
    pub async fn answer_question(
        &self,
        question: &str,
        history: &[ChatTurn],
        params: &RagParams,
        index: &VectorIndex,
    ) -> Result<Answer, RagError> {
        let question = question.trim();
        if question.is_empty() {
            return Err(RagError::EmptyQuestion);
        }
        params.validate()?;
        if index.is_empty() {
            return Err(RagError::EmptyIndex);
        }

        let query = self.embed_question(question).await?;
        let hits = index.search(&query, params.top_k)?;
        let best = hits.first().map_or(f64::NEG_INFINITY, |h| h.score);
        if best < params.similarity_floor {
            tracing::debug!(best, floor = params.similarity_floor, "below similarity floor; refusing");
            return Ok(self.refusal(question));
        }

        let messages = build_prompt(question, &hits, history, params)?;
        let model = params.chat_model.as_deref().unwrap_or(&self.default_chat_model);
        let reply = self
            .providers
            .chat
            .complete(model, &messages)
            .await
            .map_err(RagError::Chat)?;

        // The model may itself decline per the system message.
        if reply.trim() == REFUSAL_SENTENCE {
            return Ok(self.refusal(question));
        }
        Ok(Answer {
            text: reply,
            citations: hits,
            refused: false,
            question: question.to_string(),
            created_at: (self.clock)(),
        })
    }

    fn refusal(&self, question: &str) -> Answer {
        Answer {
            text: REFUSAL_SENTENCE.to_string(),
            citations: Vec::new(),
            refused: true,
            question: question.to_string(),
            created_at: (self.clock)(),
        }
    }
}
