//! Read-only client for the Zotero Web API v3.
//!
//! Only the subset needed to find and fetch PDF attachments is implemented:
//! paged item listing for a whole library or one collection, and attachment
//! file download. Every request is a `GET`; the API key travels in the
//! `Zotero-API-Key` header and never in a URL.

use std::collections::HashSet;
use std::fmt;
use std::time::Duration;

use reqwest::{Client, Response, StatusCode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::retry::{RetryPolicy, send_with_retry};
use crate::secret::Secret;

pub const DEFAULT_API_BASE: &str = "https://api.zotero.org";

/// Largest page the API will serve.
pub const MAX_PAGE_SIZE: u32 = 100;

pub const PDF_CONTENT_TYPE: &str = "application/pdf";

const API_KEY_HEADER: &str = "Zotero-API-Key";
const API_VERSION_HEADER: &str = "Zotero-API-Version";
const TOTAL_RESULTS_HEADER: &str = "Total-Results";

#[derive(Debug, Error)]
pub enum ZoteroError {
    #[error("invalid library descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("Zotero rejected the API key")]
    AuthFailed,
    #[error("Zotero library, collection or item not found")]
    NotFound,
    #[error("Zotero rate limit still in effect after retries")]
    RateLimited { retry_after: Option<Duration> },
    #[error("Zotero request failed: {0}")]
    Transport(String),
    #[error("unexpected Zotero response status {0}")]
    Status(u16),
    #[error("malformed Zotero response: {0}")]
    Decode(String),
}

impl From<reqwest::Error> for ZoteroError {
    fn from(err: reqwest::Error) -> Self {
        // reqwest includes the URL; keys are header-only so it carries no secret.
        ZoteroError::Transport(err.to_string())
    }
}

pub type Result<T, E = ZoteroError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LibraryType {
    #[default]
    User,
    Group,
}

impl LibraryType {
    fn path_segment(self) -> &'static str {
        match self {
            LibraryType::User => "users",
            LibraryType::Group => "groups",
        }
    }
}

impl fmt::Display for LibraryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LibraryType::User => "user",
            LibraryType::Group => "group",
        })
    }
}

/// Which Zotero library to read, and with what key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryDescriptor {
    pub library_type: LibraryType,
    pub library_id: String,
    pub api_key: Secret,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collection_id: Option<String>,
}

impl LibraryDescriptor {
    pub fn new(
        library_type: LibraryType,
        library_id: impl Into<String>,
        api_key: impl Into<Secret>,
        collection_id: Option<String>,
    ) -> Result<Self> {
        let desc = Self {
            library_type,
            library_id: library_id.into(),
            api_key: api_key.into(),
            collection_id,
        };
        desc.validate()?;
        Ok(desc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.library_id.is_empty() || !self.library_id.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ZoteroError::InvalidDescriptor(
                "library_id must be a non-empty string of digits".into(),
            ));
        }
        if let Some(collection) = &self.collection_id
            && !is_object_key(collection)
        {
            return Err(ZoteroError::InvalidDescriptor(
                "collection_id must be non-empty and contain only A-Z and 0-9".into(),
            ));
        }
        Ok(())
    }

    fn library_path(&self) -> String {
        format!("{}/{}", self.library_type.path_segment(), self.library_id)
    }
}

fn is_object_key(key: &str) -> bool {
    !key.is_empty() && key.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
}

/// Projection of a Zotero item onto the fields ingestion needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub item_key: String,
    pub parent_key: Option<String>,
    pub title: String,
    pub content_type: Option<String>,
    pub filename: Option<String>,
}

impl ItemRecord {
    pub fn is_pdf(&self) -> bool {
        self.content_type.as_deref() == Some(PDF_CONTENT_TYPE)
    }
}

/// Result of walking a library for attachments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttachmentScan {
    pub pdfs: Vec<ItemRecord>,
    /// Attachments with a content type other than PDF (snapshots, images, ...).
    pub other_attachments: usize,
    pub pages_fetched: usize,
}

#[derive(Deserialize)]
struct RawItem {
    key: String,
    #[serde(default)]
    data: RawItemData,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase")]
struct RawItemData {
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    parent_item: Option<String>,
    #[serde(default)]
    content_type: Option<String>,
    #[serde(default)]
    filename: Option<String>,
}

impl From<RawItem> for ItemRecord {
    fn from(raw: RawItem) -> Self {
        let RawItemData {
            title,
            parent_item,
            content_type,
            filename,
        } = raw.data;
        ItemRecord {
            item_key: raw.key,
            parent_key: parent_item.filter(|p| !p.is_empty()),
            title: title.or_else(|| filename.clone()).unwrap_or_default(),
            content_type: content_type.filter(|c| !c.is_empty()),
            filename,
        }
    }
}

/// Builds the items-listing URL against the public API host.
pub fn build_items_url(desc: &LibraryDescriptor, start: u32, limit: u32) -> Result<String> {
    items_url(DEFAULT_API_BASE, desc, start, limit)
}

fn items_url(base: &str, desc: &LibraryDescriptor, start: u32, limit: u32) -> Result<String> {
    desc.validate()?;
    if limit == 0 || limit > MAX_PAGE_SIZE {
        return Err(ZoteroError::InvalidDescriptor(format!(
            "limit must be between 1 and {MAX_PAGE_SIZE}"
        )));
    }
    let mut url = format!("{}/{}", base.trim_end_matches('/'), desc.library_path());
    if let Some(collection) = &desc.collection_id {
        url.push_str("/collections/");
        url.push_str(collection);
    }
    url.push_str(&format!("/items?start={start}&limit={limit}&format=json"));
    Ok(url)
}

/// Stateless Zotero client; cheap to clone and safe to share across tasks.
#[derive(Debug, Clone)]
pub struct ZoteroClient {
    http: Client,
    base_url: String,
    retry: RetryPolicy,
    page_size: u32,
}

impl Default for ZoteroClient {
    fn default() -> Self {
        Self::new(DEFAULT_API_BASE)
    }
}

impl ZoteroClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            http: Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .expect("default reqwest client"),
            base_url: base_url.into().trim_end_matches('/').to_string(),
            retry: RetryPolicy::default(),
            page_size: MAX_PAGE_SIZE,
        }
    }

    pub fn with_retry_policy(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Page size used when listing; clamped to `1..=100`.
    pub fn with_page_size(mut self, page_size: u32) -> Self {
        self.page_size = page_size.clamp(1, MAX_PAGE_SIZE);
        self
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn items_url(&self, desc: &LibraryDescriptor, start: u32, limit: u32) -> Result<String> {
        items_url(&self.base_url, desc, start, limit)
    }

    /// Every PDF attachment in scope, deduplicated by item key.
    pub async fn list_pdf_attachments(&self, desc: &LibraryDescriptor) -> Result<Vec<ItemRecord>> {
        Ok(self.scan_attachments(desc).await?.pdfs)
    }

    /// Walks all pages of the item listing, keeping PDF attachments and
    /// counting other attachment types.
    pub async fn scan_attachments(&self, desc: &LibraryDescriptor) -> Result<AttachmentScan> {
        let mut scan = AttachmentScan::default();
        let mut seen_pdf = HashSet::new();
        let mut seen_other = HashSet::new();
        let mut start = 0u32;
        loop {
            let url = self.items_url(desc, start, self.page_size)?;
            let response = check_status(self.get(&url, desc).await?)?;
            let total = total_results(&response);
            let items: Vec<RawItem> = response
                .json()
                .await
                .map_err(|e| ZoteroError::Decode(e.to_string()))?;
            scan.pages_fetched += 1;
            let returned = items.len() as u32;

            for item in items.into_iter().map(ItemRecord::from) {
                if item.is_pdf() {
                    if seen_pdf.insert(item.item_key.clone()) {
                        scan.pdfs.push(item);
                    }
                } else if item.content_type.is_some() && seen_other.insert(item.item_key.clone()) {
                    scan.other_attachments += 1;
                }
            }

            start += returned;
            let exhausted = match total {
                Some(total) => start >= total,
                None => returned < self.page_size,
            };
            if exhausted || returned == 0 {
                break;
            }
        }
        tracing::debug!(
            pdfs = scan.pdfs.len(),
            other = scan.other_attachments,
            pages = scan.pages_fetched,
            "scanned Zotero library"
        );
        Ok(scan)
    }

    /// Downloads the stored file of an attachment item.
    pub async fn download_attachment(&self, desc: &LibraryDescriptor, item_key: &str) -> Result<Vec<u8>> {
        desc.validate()?;
        if !is_object_key(item_key) {
            return Err(ZoteroError::NotFound);
        }
        let url = format!("{}/{}/items/{}/file", self.base_url, desc.library_path(), item_key);
        let response = check_status(self.get(&url, desc).await?)?;
        Ok(response.bytes().await?.to_vec())
    }

    /// One-item probe; succeeds iff the key can read the library (and
    /// collection, when set).
    pub async fn validate_credentials(&self, desc: &LibraryDescriptor) -> Result<()> {
        let url = self.items_url(desc, 0, 1)?;
        check_status(self.get(&url, desc).await?)?;
        Ok(())
    }

    async fn get(&self, url: &str, desc: &LibraryDescriptor) -> Result<Response> {
        Ok(send_with_retry(&self.retry, || {
            self.http
                .get(url)
                .header(API_VERSION_HEADER, "3")
                .header(API_KEY_HEADER, desc.api_key.expose())
                .send()
        })
        .await?)
    }
}

fn check_status(response: Response) -> Result<Response> {
    match response.status() {
        s if s.is_success() => Ok(response),
        StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => Err(ZoteroError::AuthFailed),
        StatusCode::NOT_FOUND => Err(ZoteroError::NotFound),
        StatusCode::TOO_MANY_REQUESTS => Err(ZoteroError::RateLimited {
            retry_after: crate::retry::retry_after(response.headers()),
        }),
        s => Err(ZoteroError::Status(s.as_u16())),
    }
}

fn total_results(response: &Response) -> Option<u32> {
    response
        .headers()
        .get(TOTAL_RESULTS_HEADER)?
        .to_str()
        .ok()?
        .trim()
        .parse()
        .ok()
}
