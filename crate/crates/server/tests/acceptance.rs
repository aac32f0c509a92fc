//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Each criterion runs at its stated scale and tolerance.

mod common;

use std::collections::BTreeSet;
use std::future::Future;
use std::pin::Pin;
use std::sync::Arc;
use std::time::Duration;

use chrono::{TimeZone, Utc};
use common::{Harness, OPENAI_KEY};
use kzb_core::{
    CannedChat, ChunkingParams, EmbeddingVector, IndexError, Ingestor, LibraryDescriptor, LibraryType, MockEmbedder,
    Providers, REFUSAL_SENTENCE, RagEngine, RagParams, RetryPolicy, SessionStore, VectorIndex, VectorRecord,
    ZoteroClient, ZoteroError, chunk_text, cosine_similarity, mock_embed,
};
use kzb_testkit::{MockItem, MockLibrary, MockZotero, corpus, oracle};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use reqwest::{Method, StatusCode};
use serde_json::json;
use sha2::{Digest, Sha256};

type Outcome = Result<(), String>;
type Named = Vec<(String, Vec<f32>)>;
type Criterion = Pin<Box<dyn Future<Output = Outcome> + Send>>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if let false = $cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(4)
        .enable_all()
        .build()
        .expect("runtime");

    let criteria: Vec<(&str, Criterion)> = vec![
        ("chunker oracle equivalence", Box::pin(async { chunker() })),
        ("vector search exactness", Box::pin(async { vector_search() })),
        ("similarity kernel", Box::pin(async { kernel() })),
        ("index persistence", Box::pin(async { persistence() })),
        ("planted-fact retrieval", Box::pin(planted_fact())),
        ("refusal path", Box::pin(refusal())),
        ("zotero client contract", Box::pin(zotero_contract())),
        ("csv export", Box::pin(async { csv_export() })),
        ("api surface", Box::pin(api_surface())),
    ];

    let total = criteria.len();
    let mut failed = 0;
    for (name, criterion) in criteria {
        let outcome = runtime.block_on(async {
            match tokio::spawn(criterion).await {
                Ok(outcome) => outcome,
                Err(e) => Err(format!("panicked: {e}")),
            }
        });
        match outcome {
            Ok(()) => println!("PASS  {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {total} criteria, {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}

fn random_text(rng: &mut StdRng) -> String {
    const EXTRA: &[char] = &['é', 'ß', '中', '😀', '\u{301}', '\u{200d}', '\r', '\t'];
    let len = match rng.random_range(0..10) {
        0 => 0,
        1..=6 => rng.random_range(1..400),
        _ => rng.random_range(400..4000),
    };
    (0..len)
        .map(|_| match rng.random_range(0..10) {
            0..=4 => rng.random_range('a'..='z'),
            5 => ' ',
            6 => '\n',
            7 => EXTRA[rng.random_range(0..EXTRA.len())],
            _ => rng.random::<char>(),
        })
        .collect()
}

fn chunker() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut violations = Vec::new();
    for case in 0..1000 {
        let text = random_text(&mut rng);
        let size = rng.random_range(1..=600);
        let overlap = rng.random_range(0..size);
        let chunks = chunk_text(&text, "doc", ChunkingParams::new(size, overlap).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;

        let got: Vec<_> = chunks.iter().map(|c| (c.start_offset, c.end_offset, c.text.clone())).collect();
        if got != oracle::windows(&text, size, overlap) {
            violations.push(format!("case {case}: differs from reference (size {size}, overlap {overlap})"));
            continue;
        }
        let n = text.chars().count();
        if n == 0 {
            continue;
        }
        let covered = chunks[0].start_offset == 0
            && chunks.last().unwrap().end_offset == n
            && chunks.windows(2).all(|p| p[1].start_offset <= p[0].end_offset);
        let overlapping = chunks.windows(2).all(|p| {
            p[1].end_offset - p[1].start_offset < size || {
                let tail: String = p[0].text.chars().skip(size - overlap).collect();
                let head: String = p[1].text.chars().take(overlap).collect();
                tail == head
            }
        });
        let mut rebuilt = chunks[0].text.clone();
        for c in &chunks[1..] {
            rebuilt.extend(c.text.chars().skip(overlap));
        }
        if !covered || !overlapping || rebuilt != text {
            violations.push(format!(
                "case {case}: coverage {covered}, overlap {overlapping}, reassembly {}",
                rebuilt == text
            ));
        }
    }
    ensure!(violations.is_empty(), "{} violations, first: {}", violations.len(), violations[0]);
    Ok(())
}

fn random_vector(rng: &mut StdRng, dim: usize) -> Vec<f32> {
    loop {
        let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        if v.iter().any(|x| x.abs() > 1e-3) {
            return v;
        }
    }
}

fn ev(v: &[f32]) -> EmbeddingVector {
    EmbeddingVector::new(v.to_vec()).expect("finite non-empty vector")
}

fn build_index(rng: &mut StdRng, n: usize, dim: usize) -> Result<(VectorIndex, Named), String> {
    let mut named: Named = Vec::with_capacity(n);
    for i in 0..n {
        // Roughly 2% exact duplicates so tie-breaking is exercised.
        let v = if i > 0 && rng.random_range(0..50) == 0 {
            named[rng.random_range(0..i)].1.clone()
        } else {
            random_vector(rng, dim)
        };
        named.push((format!("D{:03}#{i}", rng.random_range(0..200)), v));
    }
    let mut index = VectorIndex::new();
    index
        .upsert(
            named
                .iter()
                .map(|(id, v)| VectorRecord::new(id.clone(), id.split('#').next().unwrap(), 0, 1, "t", ev(v)))
                .collect(),
        )
        .map_err(|e| e.to_string())?;
    Ok((index, named))
}

fn vector_search() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    for round in 0..10 {
        let n = if round == 0 { 10_000 } else { rng.random_range(1..=10_000) };
        let dim = match round {
            0 => 256,
            1 => 8,
            _ => rng.random_range(8..=256),
        };
        let (index, named) = build_index(&mut rng, n, dim)?;
        for q in 0..5 {
            // Some queries are stored vectors, giving exact 1.0 scores and ties.
            let query = if q == 0 { named[rng.random_range(0..n)].1.clone() } else { random_vector(&mut rng, dim) };
            for k in [1, 5, 10] {
                let hits = index.search(&ev(&query), k).map_err(|e| e.to_string())?;
                let expected = oracle::naive_top_k(&named, &query, k);
                let ids: Vec<&str> = hits.iter().map(|h| h.chunk_id.as_str()).collect();
                let want: Vec<&str> = expected.iter().map(|e| e.0.as_str()).collect();
                ensure!(ids == want, "round {round} (n {n}, dim {dim}, k {k}): {ids:?} != {want:?}");
                for (h, e) in hits.iter().zip(&expected) {
                    ensure!((h.score - e.1).abs() <= 1e-6, "score {} vs {} for {}", h.score, e.1, e.0);
                }
            }
        }
    }
    Ok(())
}

#[allow(clippy::approx_constant)]
fn kernel() -> Outcome {
    let c = |a: &[f32], b: &[f32]| cosine_similarity(&ev(a), &ev(b)).map_err(|e| e.to_string());
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..100 {
        let dim = rng.random_range(1..300);
        let v = random_vector(&mut rng, dim);
        let s = c(&v, &v)?;
        ensure!((s - 1.0).abs() <= 1e-6, "identity gave {s}");
    }
    for dim in 2..64 {
        let i = rng.random_range(0..dim);
        let j = (i + rng.random_range(1..dim)) % dim;
        let mut a = vec![0.0f32; dim];
        let mut b = vec![0.0f32; dim];
        a[i] = rng.random_range(0.1..10.0);
        b[j] = -rng.random_range(0.1..10.0);
        let s = c(&a, &b)?;
        ensure!(s.abs() <= 1e-6, "orthogonal gave {s}");
    }
    ensure!(c(&[1.0, 0.0], &[0.0, 1.0])?.abs() <= 1e-6, "[1,0].[0,1] not 0");
    let diag = c(&[1.0, 1.0], &[1.0, 0.0])?;
    ensure!((diag - 0.707_106_78).abs() <= 1e-6, "[1,1].[1,0] gave {diag}");

    for _ in 0..10_000 {
        let dim = rng.random_range(1..128);
        let a = random_vector(&mut rng, dim);
        let b = random_vector(&mut rng, dim);
        let ab = c(&a, &b)?;
        let ba = c(&b, &a)?;
        ensure!((ab - ba).abs() <= 1e-6, "asymmetric: {ab} vs {ba}");
        let scale = 10f32.powf(rng.random_range(-3.0..3.0));
        let scaled: Vec<f32> = a.iter().map(|x| x * scale).collect();
        let sb = c(&scaled, &b)?;
        ensure!((sb - ab).abs() <= 1e-6, "scale {scale} moved {ab} to {sb}");
        ensure!((ab - oracle::cosine(&a, &b)).abs() <= 1e-6, "differs from reference");
    }
    Ok(())
}

fn persistence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("index.kzb");
    let (index, _) = build_index(&mut rng, 100, 48)?;
    index.persist(&path).map_err(|e| e.to_string())?;
    let loaded = VectorIndex::load(&path).map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
    ensure!(loaded.to_bytes().map_err(|e| e.to_string())? == bytes, "re-serialized bytes differ");
    for _ in 0..50 {
        let q = ev(&random_vector(&mut rng, 48));
        for k in [1, 5, 10, 100] {
            ensure!(
                loaded.search(&q, k).map_err(|e| e.to_string())? == index.search(&q, k).map_err(|e| e.to_string())?,
                "search differs after reload (k {k})"
            );
        }
    }

    let corrupt = |b: &[u8]| -> Result<bool, String> {
        std::fs::write(&path, b).map_err(|e| e.to_string())?;
        Ok(matches!(VectorIndex::load(&path), Err(IndexError::CorruptIndex(_))))
    };
    ensure!(corrupt(&[])?, "zero-byte file not CorruptIndex");
    for cut in [1, 7, 8, 12, bytes.len() / 2, bytes.len() - 5, bytes.len() - 1] {
        ensure!(corrupt(&bytes[..cut])?, "truncation at {cut} not CorruptIndex");
    }
    for _ in 0..200 {
        let cut = rng.random_range(0..bytes.len());
        ensure!(corrupt(&bytes[..cut])?, "truncation at {cut} not CorruptIndex");
    }
    for at in [bytes.len() / 3, bytes.len() - 20, bytes.len() - 1] {
        let mut tampered = bytes.clone();
        tampered[at] ^= 0x10;
        ensure!(corrupt(&tampered)?, "byte {at} flipped but not detected");
    }
    Ok(())
}

struct World {
    _zotero: MockZotero,
    _dir: tempfile::TempDir,
    index: VectorIndex,
    chat: Arc<CannedChat>,
    engine: RagEngine,
}

async fn world() -> Result<World, String> {
    let zotero = MockZotero::start(vec![corpus::library()]).await;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let desc = LibraryDescriptor::new(LibraryType::Group, corpus::GROUP_ID, corpus::API_KEY, None)
        .map_err(|e| e.to_string())?;
    let client = ZoteroClient::new(zotero.base_url()).with_retry_policy(RetryPolicy::fast());
    let ingestor = Ingestor::new(client, Arc::new(MockEmbedder::default()), ChunkingParams::default());
    let index = ingestor
        .ingest_zotero(&desc, &dir.path().join("index.kzb"))
        .await
        .map_err(|e| e.to_string())?;
    let chat = Arc::new(CannedChat::new());
    let providers = Providers {
        embedder: Arc::new(MockEmbedder::default()),
        chat: chat.clone(),
    };
    let engine = RagEngine::new(providers, "canned").with_clock(|| Utc.with_ymd_and_hms(2024, 5, 6, 7, 8, 9).unwrap());
    Ok(World {
        _zotero: zotero,
        _dir: dir,
        index,
        chat,
        engine,
    })
}

async fn planted_fact() -> Outcome {
    let mut outputs = Vec::new();
    for run in 0..5 {
        // A fresh ingest each run: determinism covers the whole pipeline.
        let w = world().await?;
        let a = w
            .engine
            .answer_question(corpus::PLANTED_QUESTION, &[], &RagParams::default(), &w.index)
            .await
            .map_err(|e| e.to_string())?;
        ensure!(!a.refused, "run {run}: refused");
        ensure!(
            a.citations.first().map(|c| c.doc_id.as_str()) == Some(corpus::PLANTED_DOC),
            "run {run}: rank-1 citation is {:?}",
            a.citations.first().map(|c| &c.doc_id)
        );
        ensure!(a.text.contains(corpus::PLANTED_FACT), "run {run}: answer lacks the fact: {}", a.text);
        outputs.push(serde_json::to_string(&a).map_err(|e| e.to_string())?);
    }
    ensure!(outputs.windows(2).all(|p| p[0] == p[1]), "answers differ between runs");
    Ok(())
}

async fn refusal() -> Outcome {
    let w = world().await?;
    let floor = RagParams::default().similarity_floor;
    let best = w.index.search(&mock_embed(corpus::OFF_TOPIC_QUESTION), 1).map_err(|e| e.to_string())?[0].score;
    ensure!(best < floor, "fixture invalid: best score {best} >= floor {floor}");
    let a = w
        .engine
        .answer_question(corpus::OFF_TOPIC_QUESTION, &[], &RagParams::default(), &w.index)
        .await
        .map_err(|e| e.to_string())?;
    ensure!(
        a.text == "I apologize, but I do not have any information about it in my Zotero library.",
        "text was {:?}",
        a.text
    );
    ensure!(a.text == REFUSAL_SENTENCE && a.refused && a.citations.is_empty(), "refusal flags wrong");
    ensure!(w.chat.call_count() == 0, "chat provider called {} times", w.chat.call_count());
    Ok(())
}

async fn zotero_contract() -> Outcome {
    const KEY: &str = "acceptance-key-33";
    let client = |z: &MockZotero| ZoteroClient::new(z.base_url()).with_retry_policy(RetryPolicy::fast());
    let user = LibraryDescriptor::new(LibraryType::User, "77", KEY, None).map_err(|e| e.to_string())?;

    // Pagination.
    let big = MockLibrary::user("77", KEY).items((0..250).map(|i| MockItem::pdf(&format!("P{i:07}"), "p", vec![1])));
    let z = MockZotero::start(vec![big]).await;
    let scan = client(&z).scan_attachments(&user).await.map_err(|e| e.to_string())?;
    ensure!(scan.pdfs.len() == 250 && scan.pages_fetched == 3, "{} items over {} pages", scan.pdfs.len(), scan.pages_fetched);
    let starts: Vec<String> = z.requests().iter().map(|r| r.query.clone()).collect();
    ensure!(
        starts == ["start=0&limit=100&format=json", "start=100&limit=100&format=json", "start=200&limit=100&format=json"],
        "page requests {starts:?}"
    );
    let mut sets = Vec::new();
    for size in [100, 25, 7, 250] {
        let items = client(&z).with_page_size(size).list_pdf_attachments(&user).await.map_err(|e| e.to_string())?;
        sets.push(items.into_iter().map(|i| i.item_key).collect::<BTreeSet<_>>());
    }
    ensure!(sets[0].len() == 250 && sets.windows(2).all(|p| p[0] == p[1]), "key set depends on page size");

    // PDF-only filtering, status mapping, downloads.
    let z = MockZotero::start(vec![corpus::library()]).await;
    let group = |key: &str| LibraryDescriptor::new(LibraryType::Group, corpus::GROUP_ID, key, None).unwrap();
    let desc = group(corpus::API_KEY);
    let items = client(&z).list_pdf_attachments(&desc).await.map_err(|e| e.to_string())?;
    let keys: Vec<&str> = items.iter().map(|i| i.item_key.as_str()).collect();
    ensure!(keys == ["AAAA1111", "BBBB2222", "CCCC3333"], "pdf filter kept {keys:?}");

    let forbidden = client(&z).list_pdf_attachments(&group("wrong-key")).await;
    ensure!(matches!(forbidden, Err(ZoteroError::AuthFailed)), "403 gave {forbidden:?}");
    let missing = LibraryDescriptor::new(LibraryType::Group, "999", corpus::API_KEY, None).unwrap();
    let missing = client(&z).list_pdf_attachments(&missing).await;
    ensure!(matches!(missing, Err(ZoteroError::NotFound)), "404 gave {missing:?}");

    let before = z.requests().len();
    z.inject(429, 2);
    let retried = client(&z).list_pdf_attachments(&desc).await;
    ensure!(retried.as_ref().map(Vec::len).ok() == Some(3), "429 x2 not recovered: {retried:?}");
    ensure!(z.requests().len() - before == 3, "expected 3 requests for two 429s");
    z.inject(429, 4);
    let surfaced = client(&z).list_pdf_attachments(&desc).await;
    ensure!(matches!(surfaced, Err(ZoteroError::RateLimited { .. })), "429 x4 gave {surfaced:?}");

    for doc in &corpus::DOCS {
        let bytes = client(&z).download_attachment(&desc, doc.key).await.map_err(|e| e.to_string())?;
        ensure!(
            Sha256::digest(&bytes) == Sha256::digest(corpus::pdf_bytes(doc)),
            "hash mismatch for {}",
            doc.key
        );
    }
    ensure!(z.requests().iter().all(|r| r.method == "GET"), "non-GET request sent");
    Ok(())
}

fn csv_export() -> Outcome {
    const PIECES: &[&str] = &[
        "plain", ",", "\"", "\"\"", "\n", "\r\n", "\r", " ", "😀", "naïve", "中文", "a,b", "\"quoted\"", ";", "\t",
        "=SUM(A1)", "", "line\nbreak", "🏳️‍🌈", "\u{feff}",
    ];
    let adversarial = |rng: &mut StdRng| -> String {
        let s: String = (0..rng.random_range(0..14)).map(|_| PIECES[rng.random_range(0..PIECES.len())]).collect();
        if s.trim().is_empty() { format!("x{s}") } else { s }
    };

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let store = SessionStore::open(dir.path()).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(8);
    let mut mismatches = 0usize;
    for _ in 0..200 {
        let id = store.create_session().map_err(|e| e.to_string())?.session_id;
        for _ in 0..rng.random_range(1..6) {
            let cites = (0..rng.random_range(0..4)).map(|i| format!("K{}#{i}", rng.random_range(0..99))).collect();
            store
                .append_exchange(&id, adversarial(&mut rng), adversarial(&mut rng), cites)
                .map_err(|e| e.to_string())?;
        }
        let turns = store.get_history(&id).map_err(|e| e.to_string())?;
        let bytes = store.export_csv(&id).map_err(|e| e.to_string())?;
        let rows: Vec<csv::StringRecord> = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(bytes.as_slice())
            .records()
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure!(rows.len() == turns.len() + 1, "row count {} for {} turns", rows.len(), turns.len());
        for (turn, row) in turns.iter().zip(&rows[1..]) {
            let expected = [
                turn.turn_index.to_string(),
                turn.timestamp.clone(),
                turn.role.as_str().to_string(),
                turn.content.clone(),
                turn.citations.join(";"),
            ];
            mismatches += expected.len().abs_diff(row.len());
            mismatches += expected.iter().zip(row.iter()).filter(|(a, b)| a.as_str() != *b).count();
        }
    }
    ensure!(mismatches == 0, "{mismatches} field mismatches");
    Ok(())
}

async fn api_surface() -> Outcome {
    let h = Arc::new(Harness::start_with_chat(CannedChat::with_delay(Duration::from_millis(60))).await);
    let code = |r: &common::Reply| r.status;

    let health = h.get("/api/health").await;
    ensure!(code(&health) == StatusCode::OK && health.json()["index_size"] == 0, "health: {}", health.text);
    let cfg = h.get("/api/config").await;
    ensure!(cfg.json()["zotero"]["api_key"] == "***", "config not redacted");
    let post = h.post("/api/config", json!({"rag": {"top_k": 4}})).await;
    ensure!(code(&post) == StatusCode::OK && post.json()["rag"]["top_k"] == 4, "config post: {}", post.text);
    let bad = h.post("/api/config", json!({"chunking": {"chunk_size": 5, "chunk_overlap": 9}})).await;
    ensure!(code(&bad) == StatusCode::BAD_REQUEST, "invalid config accepted");
    let valid = h.post("/api/config/validate", json!({})).await;
    ensure!(valid.json() == json!({"ok": true}), "validate: {}", valid.text);

    let id = h.new_session().await;
    let early = h.post(&format!("/api/sessions/{id}/chat"), json!({"question": "q"})).await;
    ensure!(early.error_code() == "index_empty", "chat before ingest: {}", early.text);

    let started = h.call(Method::POST, "/api/ingest", None).await;
    ensure!(code(&started) == StatusCode::ACCEPTED, "ingest start: {}", started.text);
    let status = h.wait_for_ingest().await;
    ensure!(status["state"] == "done" && status["docs_extracted"] == 3, "ingest status {status}");
    ensure!(h.get("/api/health").await.json()["dimension"] == 64, "health after ingest");

    let answer = h
        .post(&format!("/api/sessions/{id}/chat"), json!({"question": corpus::PLANTED_QUESTION}))
        .await;
    ensure!(answer.json()["citations"][0]["doc_id"] == corpus::PLANTED_DOC, "chat: {}", answer.text);

    // Concurrent posts, each sent while the previous one is still waiting on the model.
    let mut tasks = Vec::new();
    for i in 0..8 {
        let h = h.clone();
        let path = format!("/api/sessions/{id}/chat");
        tasks.push(tokio::spawn(async move {
            h.post(&path, json!({ "question": format!("zobotite melting point #{i}") })).await
        }));
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    for t in tasks {
        let r = t.await.map_err(|e| e.to_string())?;
        ensure!(r.status == StatusCode::OK, "concurrent chat: {}", r.text);
    }
    let history = h.get(&format!("/api/sessions/{id}/history")).await.json();
    let users: Vec<String> = history
        .as_array()
        .ok_or("history not an array")?
        .iter()
        .filter(|t| t["role"] == "user")
        .map(|t| t["content"].as_str().unwrap_or_default().to_string())
        .collect();
    let expected: Vec<String> = std::iter::once(corpus::PLANTED_QUESTION.to_string())
        .chain((0..8).map(|i| format!("zobotite melting point #{i}")))
        .collect();
    ensure!(users == expected, "history order {users:?}");

    let csv = h.get(&format!("/api/sessions/{id}/export.csv")).await;
    ensure!(
        code(&csv) == StatusCode::OK && csv.text.starts_with("turn_index,timestamp,role,content,citations\r\n"),
        "export: {}",
        csv.text
    );
    let ghost = h.get("/api/sessions/00000000-0000-4000-8000-000000000000/history").await;
    ensure!(code(&ghost) == StatusCode::NOT_FOUND, "unknown session gave {}", ghost.status);
    ensure!(h.get("/api/nowhere").await.status == StatusCode::NOT_FOUND, "unknown route");
    ensure!(
        h.call(Method::PUT, "/api/config", None).await.status == StatusCode::METHOD_NOT_ALLOWED,
        "wrong method"
    );

    let leaks = h.leaks(&[OPENAI_KEY, corpus::API_KEY]);
    ensure!(leaks.is_empty(), "{} response bodies contain a key", leaks.len());
    ensure!(h.zotero.requests().iter().all(|r| r.method == "GET"), "non-GET sent to Zotero");
    Ok(())
}
