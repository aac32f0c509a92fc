//! Command-line interface. Every verb runs the same engine as the server.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kzb_core::{
    Answer, AppConfig, ConfigError, IngestError, IngestStatus, Ingestor, LibraryType, ProviderError, ProviderMode,
    Providers, RagEngine, RagError, SessionError, SessionStore, VectorIndex, ZoteroClient, ZoteroError,
};
use thiserror::Error;

use crate::{AppState, StartupError};

#[derive(Debug, Parser)]
#[command(name = "kzb", version, about = "Ask questions about the PDFs in your Zotero library")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides applied on top of `kzb.toml` and the environment.
#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Data directory holding kzb.toml, the index and sessions [env: KZB_DATA_DIR]
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Zotero API key [env: KZB_ZOTERO_KEY]
    #[arg(long, global = true)]
    pub zotero_key: Option<String>,
    /// Embedding/chat provider API key [env: KZB_OPENAI_KEY]
    #[arg(long, global = true)]
    pub openai_key: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub library_type: Option<LibraryTypeArg>,
    /// Numeric user or group id
    #[arg(long, global = true)]
    pub library_id: Option<String>,
    /// Restrict to one collection; pass "" to clear
    #[arg(long, global = true)]
    pub collection_id: Option<String>,
    #[arg(long, global = true)]
    pub zotero_api_base: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// OpenAI-compatible API root, e.g. https://api.openai.com/v1
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub embedding_model: Option<String>,
    #[arg(long, global = true)]
    pub chat_model: Option<String>,
    #[arg(long, global = true)]
    pub chunk_size: Option<usize>,
    #[arg(long, global = true)]
    pub chunk_overlap: Option<usize>,
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
    #[arg(long, global = true)]
    pub similarity_floor: Option<f64>,
    /// host:port for `serve`
    #[arg(long, global = true)]
    pub listen: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LibraryTypeArg {
    User,
    Group,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Live,
    Mock,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the merged settings and write them to kzb.toml
    Configure,
    /// Build the index from the Zotero library, or from a local folder
    Ingest {
        /// Index the .pdf and .txt files in this directory instead
        #[arg(long)]
        local: Option<PathBuf>,
    },
    /// Interactive question loop
    Chat {
        #[arg(long)]
        session: Option<String>,
    },
    /// Answer one question and exit
    Ask {
        question: String,
        #[arg(long)]
        session: Option<String>,
    },
    /// Write a session transcript as CSV
    Export {
        #[arg(long)]
        session: String,
        /// Output file, or - for stdout
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP API
    Serve,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Startup(#[from] StartupError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Rag(#[from] RagError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Zotero(#[from] ZoteroError),
    #[error("no index at {0}; run `kzb ingest` first")]
    NoIndex(PathBuf),
    #[error("cannot read index: {0}")]
    Index(#[from] kzb_core::IndexError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GlobalArgs {
    /// Defaults < kzb.toml < environment < these flags.
    pub fn resolve(&self, env: impl Fn(&str) -> Option<String>) -> Result<AppConfig, ConfigError> {
        let mut c = AppConfig::load_layered(self.data_dir.as_deref(), env)?;
        if let Some(k) = &self.zotero_key {
            c.zotero.api_key = k.as_str().into();
        }
        if let Some(k) = &self.openai_key {
            c.provider.api_key = k.as_str().into();
        }
        if let Some(t) = self.library_type {
            c.zotero.library_type = match t {
                LibraryTypeArg::User => LibraryType::User,
                LibraryTypeArg::Group => LibraryType::Group,
            };
        }
        if let Some(id) = &self.library_id {
            c.zotero.library_id = id.clone();
        }
        if let Some(cid) = &self.collection_id {
            c.zotero.collection_id = Some(cid.clone()).filter(|s| !s.is_empty());
        }
        if let Some(base) = &self.zotero_api_base {
            c.zotero_api_base = base.clone();
        }
        if let Some(m) = self.mode {
            c.provider.mode = match m {
                ModeArg::Live => ProviderMode::Live,
                ModeArg::Mock => ProviderMode::Mock,
            };
        }
        if let Some(e) = &self.endpoint {
            c.provider.endpoint_url = e.clone();
        }
        if let Some(m) = &self.embedding_model {
            c.provider.embedding_model = m.clone();
        }
        if let Some(m) = &self.chat_model {
            c.provider.chat_model = m.clone();
        }
        if let Some(n) = self.chunk_size {
            c.chunking.chunk_size = n;
        }
        if let Some(n) = self.chunk_overlap {
            c.chunking.chunk_overlap = n;
        }
        if let Some(k) = self.top_k {
            c.rag.top_k = k;
        }
        if let Some(f) = self.similarity_floor {
            c.rag.similarity_floor = f;
        }
        if let Some(l) = &self.listen {
            c.listen_addr = l.clone();
        }
        Ok(c)
    }
}

/// Runs one verb. Normal output goes to `out`; progress and notes to stderr.
pub async fn run(cli: Cli, env: impl Fn(&str) -> Option<String>, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let config = cli.global.resolve(env)?;
    match cli.command {
        Command::Configure => configure(&config, out),
        Command::Ingest { local } => ingest(&config, local.as_deref(), out).await,
        Command::Ask { question, session } => {
            let chat = ChatContext::open(&config, session)?;
            let answer = chat.ask(&question).await?;
            print_answer(out, &answer)?;
            eprintln!("session: {}", chat.session_id);
            Ok(())
        }
        Command::Chat { session } => {
            let chat = ChatContext::open(&config, session)?;
            eprintln!("session: {} (empty line or Ctrl-D to quit)", chat.session_id);
            let stdin = std::io::stdin();
            loop {
                write!(out, "> ")?;
                out.flush()?;
                let mut line = String::new();
                if stdin.lock().read_line(&mut line)? == 0 || line.trim().is_empty() {
                    break;
                }
                match chat.ask(&line).await {
                    Ok(answer) => print_answer(out, &answer)?,
                    Err(err) => eprintln!("error: {err}"),
                }
            }
            Ok(())
        }
        Command::Export { session, out: path } => {
            let bytes = SessionStore::open(&config.data_dir)?.export_csv(&session)?;
            if path == Path::new("-") {
                out.write_all(&bytes)?;
            } else {
                std::fs::write(&path, bytes)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Serve => serve(config).await,
    }
}

fn configure(config: &AppConfig, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    config.validate_engine()?;
    if !config.zotero.library_id.is_empty() {
        config.zotero.validate()?;
    }
    let path = config.save()?;
    writeln!(out, "# saved to {}", path.display())?;
    write!(out, "{}", config.redacted().to_toml_string()?)?;
    Ok(())
}

async fn ingest(config: &AppConfig, local: Option<&Path>, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    config.validate_engine()?;
    config.ensure_data_dir()?;
    let providers = Providers::from_config(&config.provider)?;
    let ingestor = Ingestor::new(
        ZoteroClient::new(&config.zotero_api_base),
        Arc::clone(&providers.embedder),
        config.chunking,
    );
    let result = match local {
        Some(dir) => ingestor.ingest_dir(dir, &config.index_path()).await,
        None => {
            config.zotero.validate()?;
            ingestor.ingest_zotero(&config.zotero, &config.index_path()).await
        }
    };
    print_status(out, &ingestor.status().snapshot())?;
    result?;
    writeln!(out, "index: {}", config.index_path().display())?;
    Ok(())
}

fn print_status(out: &mut (dyn Write + Send), s: &IngestStatus) -> std::io::Result<()> {
    writeln!(
        out,
        "found {} documents: {} indexed, {} skipped, {} chunks ({} non-PDF attachments ignored)",
        s.docs_found, s.docs_extracted, s.docs_skipped, s.chunks_indexed, s.non_pdf_attachments
    )?;
    for e in &s.errors {
        writeln!(out, "  {e}")?;
    }
    Ok(())
}

fn print_answer(out: &mut (dyn Write + Send), answer: &Answer) -> std::io::Result<()> {
    writeln!(out, "{}", answer.text)?;
    if !answer.citations.is_empty() {
        writeln!(out, "\nSources:")?;
        for hit in &answer.citations {
            writeln!(out, "  [{}] score {:.3}", hit.chunk_id, hit.score)?;
        }
    }
    Ok(())
}

struct ChatContext {
    config: AppConfig,
    engine: RagEngine,
    index: VectorIndex,
    store: SessionStore,
    session_id: String,
}

impl ChatContext {
    fn open(config: &AppConfig, session: Option<String>) -> Result<Self, CliError> {
        config.validate_engine()?;
        let path = config.index_path();
        if !path.exists() {
            return Err(CliError::NoIndex(path));
        }
        let index = VectorIndex::load(&path)?;
        let providers = Providers::from_config(&config.provider)?;
        let store = SessionStore::open(&config.data_dir)?;
        let session_id = match session {
            Some(id) => store.get_session(&id)?.session_id,
            None => store.create_session()?.session_id,
        };
        Ok(Self {
            engine: RagEngine::new(providers, config.provider.chat_model.clone()),
            config: config.clone(),
            index,
            store,
            session_id,
        })
    }

    async fn ask(&self, question: &str) -> Result<Answer, CliError> {
        let history = self.store.get_history(&self.session_id)?;
        let answer = self
            .engine
            .answer_question(question, &history, &self.config.rag, &self.index)
            .await?;
        self.store.append_exchange(
            &self.session_id,
            answer.question.clone(),
            answer.text.clone(),
            answer.citation_ids(),
        )?;
        Ok(answer)
    }
}

async fn serve(config: AppConfig) -> Result<(), CliError> {
    let listener = tokio::net::TcpListener::bind(&config.listen_addr).await?;
    let addr = listener.local_addr()?;
    if !addr.ip().is_loopback() {
        tracing::warn!(%addr, "listening on a non-loopback address; the API has no authentication");
    }
    let state = Arc::new(AppState::new(config)?);
    eprintln!("kzb listening on http://{addr}");
    crate::serve(state, listener, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
