use std::sync::Arc;

use chrono::{TimeZone, Utc};
use kzb_core::{
    CannedChat, ChunkingParams, IngestState, Ingestor, LibraryDescriptor, LibraryType, MockEmbedder, Providers,
    REFUSAL_SENTENCE, RagEngine, RagError, RagParams, RetryPolicy, VectorIndex, ZoteroClient, mock_embed,
};
use kzb_testkit::{MockZotero, corpus};

struct World {
    _mock: MockZotero,
    _dir: tempfile::TempDir,
    index: VectorIndex,
    chat: Arc<CannedChat>,
    engine: RagEngine,
}

async fn world() -> World {
    let mock = MockZotero::start(vec![corpus::library()]).await;
    let dir = tempfile::tempdir().unwrap();
    let desc = LibraryDescriptor::new(LibraryType::Group, corpus::GROUP_ID, corpus::API_KEY, None).unwrap();
    let zotero = ZoteroClient::new(mock.base_url()).with_retry_policy(RetryPolicy::fast());
    let ingestor = Ingestor::new(zotero, Arc::new(MockEmbedder::default()), ChunkingParams::default());
    let index_path = dir.path().join("index.kzb");
    let index = ingestor.ingest_zotero(&desc, &index_path).await.unwrap();

    let status = ingestor.status().snapshot();
    assert_eq!(status.state, IngestState::Done);
    assert_eq!(status.docs_found, 3);
    assert_eq!(status.docs_extracted, 3);
    assert_eq!(status.non_pdf_attachments, 1);
    assert!(status.chunks_indexed > 0);
    assert_eq!(VectorIndex::load(&index_path).unwrap(), index);

    let chat = Arc::new(CannedChat::new());
    let providers = Providers {
        embedder: Arc::new(MockEmbedder::default()),
        chat: chat.clone(),
    };
    let engine = RagEngine::new(providers, "canned").with_clock(|| Utc.with_ymd_and_hms(2024, 1, 2, 3, 4, 5).unwrap());
    World {
        _mock: mock,
        _dir: dir,
        index,
        chat,
        engine,
    }
}

#[tokio::test]
async fn planted_fact_is_found_and_cited() {
    let w = world().await;
    let mut answers = Vec::new();
    for _ in 0..5 {
        let a = w
            .engine
            .answer_question(corpus::PLANTED_QUESTION, &[], &RagParams::default(), &w.index)
            .await
            .unwrap();
        assert!(!a.refused);
        assert_eq!(a.citations[0].doc_id, corpus::PLANTED_DOC);
        assert!(a.text.contains(corpus::PLANTED_FACT), "{}", a.text);
        answers.push(serde_json::to_vec(&a).unwrap());
    }
    assert!(answers.windows(2).all(|p| p[0] == p[1]), "answers differ between runs");
    assert_eq!(w.chat.call_count(), 5);
}

#[tokio::test]
async fn off_topic_question_is_refused_without_chat() {
    let w = world().await;
    // Fixture check: the question really is below the floor for every chunk.
    let q = mock_embed(corpus::OFF_TOPIC_QUESTION);
    let best = w.index.search(&q, 1).unwrap()[0].score;
    assert!(best < RagParams::default().similarity_floor, "fixture too close: {best}");

    let a = w
        .engine
        .answer_question(corpus::OFF_TOPIC_QUESTION, &[], &RagParams::default(), &w.index)
        .await
        .unwrap();
    assert!(a.refused);
    assert_eq!(a.text, REFUSAL_SENTENCE);
    assert_eq!(a.text, "I apologize, but I do not have any information about it in my Zotero library.");
    assert!(a.citations.is_empty());
    assert_eq!(w.chat.call_count(), 0);
}

#[tokio::test]
async fn top_k_and_history_flow_through() {
    let w = world().await;
    let params = RagParams {
        top_k: 2,
        ..RagParams::default()
    };
    let a = w
        .engine
        .answer_question(corpus::PLANTED_QUESTION, &[], &params, &w.index)
        .await
        .unwrap();
    assert_eq!(a.citations.len(), 2);
    assert!(a.citations[0].score >= a.citations[1].score);
}

#[tokio::test]
async fn empty_index_and_empty_question() {
    let w = world().await;
    let err = w
        .engine
        .answer_question("anything", &[], &RagParams::default(), &VectorIndex::new())
        .await
        .unwrap_err();
    assert!(matches!(err, RagError::EmptyIndex));
    let err = w
        .engine
        .answer_question("   ", &[], &RagParams::default(), &w.index)
        .await
        .unwrap_err();
    assert!(matches!(err, RagError::EmptyQuestion));
    assert_eq!(w.chat.call_count(), 0);
}
