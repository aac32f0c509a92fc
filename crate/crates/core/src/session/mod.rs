//! Durable chat sessions.
//!
//! Each session is an append-only JSON-lines file `<data_dir>/sessions/<uuid>.jsonl`:
//! a header line, then one line per turn. Every line carries a format
//! version `v`. Appends are fsynced before returning.

mod csv;

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

pub use csv::{CITATION_SEPARATOR, HEADER as CSV_HEADER};

const LINE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("turn {turn_index} must be a {expected} turn")]
    RoleOrderViolation { turn_index: u64, expected: TurnRole },
    #[error("session file is corrupt: {0}")]
    Corrupt(String),
    #[error("session I/O failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnRole {
    User,
    Assistant,
}

impl TurnRole {
    pub fn as_str(self) -> &'static str {
        match self {
            TurnRole::User => "user",
            TurnRole::Assistant => "assistant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "user" => Some(TurnRole::User),
            "assistant" => Some(TurnRole::Assistant),
            _ => None,
        }
    }
}

impl std::fmt::Display for TurnRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub turn_index: u64,
    pub role: TurnRole,
    pub content: String,
    /// UTC, RFC 3339 with millisecond precision.
    pub timestamp: String,
    /// `doc_id#ordinal` chunk ids; empty for user turns.
    #[serde(default)]
    pub citations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub created_at: String,
    pub turns: Vec<ChatTurn>,
}

impl Session {
    /// Role the next appended turn must have.
    pub fn expected_role(&self) -> TurnRole {
        if self.turns.len().is_multiple_of(2) {
            TurnRole::User
        } else {
            TurnRole::Assistant
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Session {
        v: u32,
        session_id: String,
        created_at: String,
    },
    Turn {
        v: u32,
        #[serde(flatten)]
        turn: ChatTurn,
    },
}

struct OpenSession {
    session: Session,
    file: File,
}

impl OpenSession {
    fn write_line(&mut self, line: &Line) -> Result<(), SessionError> {
        let mut buf = serde_json::to_vec(line).map_err(|e| SessionError::Corrupt(e.to_string()))?;
        buf.push(b'\n');
        self.file.write_all(&buf)?;
        self.file.sync_data()?;
        Ok(())
    }

    fn push(&mut self, role: TurnRole, content: String, citations: Vec<String>) -> Result<ChatTurn, SessionError> {
        let turn_index = self.session.turns.len() as u64;
        let expected = self.session.expected_role();
        if role != expected {
            return Err(SessionError::RoleOrderViolation { turn_index, expected });
        }
        let turn = ChatTurn {
            turn_index,
            role,
            content,
            timestamp: now(),
            citations,
        };
        self.write_line(&Line::Turn {
            v: LINE_VERSION,
            turn: turn.clone(),
        })?;
        self.session.turns.push(turn.clone());
        Ok(turn)
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Session persistence. Appends to one session are serialized; different
/// sessions proceed independently.
pub struct SessionStore {
    dir: PathBuf,
    open: Mutex<HashMap<String, Arc<Mutex<OpenSession>>>>,
}

impl std::fmt::Debug for SessionStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionStore").field("dir", &self.dir).finish_non_exhaustive()
    }
}

impl SessionStore {
    /// Opens (creating if needed) the session directory under `data_dir`.
    pub fn open(data_dir: impl AsRef<Path>) -> Result<Self, SessionError> {
        let dir = data_dir.as_ref().join("sessions");
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            open: Mutex::new(HashMap::new()),
        })
    }

    pub fn create_session(&self) -> Result<Session, SessionError> {
        let session_id = Uuid::new_v4().to_string();
        let path = self.path_for(&session_id);
        let file = OpenOptions::new().create_new(true).append(true).open(&path)?;
        let mut open = OpenSession {
            session: Session {
                session_id: session_id.clone(),
                created_at: now(),
                turns: Vec::new(),
            },
            file,
        };
        open.write_line(&Line::Session {
            v: LINE_VERSION,
            session_id: session_id.clone(),
            created_at: open.session.created_at.clone(),
        })?;
        let snapshot = open.session.clone();
        self.open
            .lock()
            .expect("session map poisoned")
            .insert(session_id, Arc::new(Mutex::new(open)));
        Ok(snapshot)
    }

    pub fn get_session(&self, session_id: &str) -> Result<Session, SessionError> {
        let handle = self.handle(session_id)?;
        let guard = handle.lock().expect("session poisoned");
        Ok(guard.session.clone())
    }

    pub fn get_history(&self, session_id: &str) -> Result<Vec<ChatTurn>, SessionError> {
        Ok(self.get_session(session_id)?.turns)
    }

    /// Appends one turn. Roles must alternate starting with `user`.
    pub fn append_turn(
        &self,
        session_id: &str,
        role: TurnRole,
        content: impl Into<String>,
        citations: Vec<String>,
    ) -> Result<ChatTurn, SessionError> {
        let handle = self.handle(session_id)?;
        let mut guard = handle.lock().expect("session poisoned");
        guard.push(role, content.into(), citations)
    }

    /// Appends a user question and the assistant's reply with no other
    /// append interleaved between them.
    pub fn append_exchange(
        &self,
        session_id: &str,
        question: impl Into<String>,
        answer: impl Into<String>,
        citations: Vec<String>,
    ) -> Result<(ChatTurn, ChatTurn), SessionError> {
        let handle = self.handle(session_id)?;
        let mut guard = handle.lock().expect("session poisoned");
        let user = guard.push(TurnRole::User, question.into(), Vec::new())?;
        let assistant = guard.push(TurnRole::Assistant, answer.into(), citations)?;
        Ok((user, assistant))
    }

    /// The session transcript as RFC 4180 CSV (UTF-8, CRLF line endings).
    pub fn export_csv(&self, session_id: &str) -> Result<Vec<u8>, SessionError> {
        let handle = self.handle(session_id)?;
        let guard = handle.lock().expect("session poisoned");
        Ok(csv::render(&guard.session.turns))
    }

    /// Ids of every session on disk, sorted.
    pub fn list_sessions(&self) -> Result<Vec<String>, SessionError> {
        let mut ids: Vec<String> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let id = name.strip_suffix(".jsonl")?;
                Uuid::parse_str(id).ok().map(|_| id.to_string())
            })
            .collect();
        ids.sort();
        Ok(ids)
    }

    fn path_for(&self, session_id: &str) -> PathBuf {
        self.dir.join(format!("{session_id}.jsonl"))
    }

    fn handle(&self, session_id: &str) -> Result<Arc<Mutex<OpenSession>>, SessionError> {
        // Only canonical UUIDs name files, which also rules out path tricks.
        let canonical = Uuid::parse_str(session_id)
            .map(|u| u.to_string())
            .map_err(|_| SessionError::UnknownSession(session_id.to_string()))?;
        if canonical != session_id {
            return Err(SessionError::UnknownSession(session_id.to_string()));
        }
        let mut open = self.open.lock().expect("session map poisoned");
        if let Some(h) = open.get(session_id) {
            return Ok(Arc::clone(h));
        }
        let path = self.path_for(session_id);
        if !path.exists() {
            return Err(SessionError::UnknownSession(session_id.to_string()));
        }
        let session = read_session(&path)?;
        let file = OpenOptions::new().append(true).open(&path)?;
        let handle = Arc::new(Mutex::new(OpenSession { session, file }));
        open.insert(session_id.to_string(), Arc::clone(&handle));
        Ok(handle)
    }
}

/// Reads a session file. A final line without its newline is an append
/// interrupted by a crash and is dropped; any other bad line is corruption.
fn read_session(path: &Path) -> Result<Session, SessionError> {
    let reader = BufReader::new(File::open(path)?);
    let mut session: Option<Session> = None;
    let mut lines = reader.split(b'\n').peekable();
    let content_len = fs::metadata(path)?.len();
    let mut consumed = 0u64;
    while let Some(raw) = lines.next() {
        let raw = raw?;
        consumed += raw.len() as u64 + 1;
        let unterminated = lines.peek().is_none() && consumed > content_len;
        if raw.is_empty() {
            continue;
        }
        let line: Line = match serde_json::from_slice(&raw) {
            Ok(line) => line,
            Err(_) if unterminated => break,
            Err(e) => return Err(SessionError::Corrupt(e.to_string())),
        };
        match line {
            Line::Session {
                v,
                session_id,
                created_at,
            } => {
                check_version(v)?;
                if session.is_some() {
                    return Err(SessionError::Corrupt("duplicate session header".into()));
                }
                session = Some(Session {
                    session_id,
                    created_at,
                    turns: Vec::new(),
                });
            }
            Line::Turn { v, turn } => {
                check_version(v)?;
                let s = session
                    .as_mut()
                    .ok_or_else(|| SessionError::Corrupt("turn before session header".into()))?;
                if turn.turn_index != s.turns.len() as u64 || turn.role != s.expected_role() {
                    return Err(SessionError::Corrupt(format!("out-of-order turn {}", turn.turn_index)));
                }
                s.turns.push(turn);
            }
        }
    }
    session.ok_or_else(|| SessionError::Corrupt("missing session header".into()))
}

fn check_version(v: u32) -> Result<(), SessionError> {
    if v == LINE_VERSION {
        Ok(())
    } else {
        Err(SessionError::Corrupt(format!("unsupported line version {v}")))
    }
}
