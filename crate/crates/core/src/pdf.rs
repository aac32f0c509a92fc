//! PDF (and plain-text) to normalized UTF-8 text.

use std::panic::{self, AssertUnwindSafe};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("not a PDF: missing %PDF header")]
    NotAPdf,
    #[error("PDF is password-protected")]
    EncryptedPdf,
    #[error("PDF contains no extractable text")]
    NoExtractableText,
    #[error("PDF could not be parsed: {0}")]
    Malformed(String),
}

/// Text pulled out of one document, ready for chunking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractedDocument {
    pub doc_id: String,
    pub title: String,
    pub text: String,
    pub page_count: usize,
    pub char_count: usize,
}

impl ExtractedDocument {
    fn new(doc_id: &str, title: &str, text: String, page_count: usize) -> Result<Self, ExtractError> {
        if text.trim().is_empty() {
            return Err(ExtractError::NoExtractableText);
        }
        Ok(Self {
            doc_id: doc_id.to_string(),
            title: title.to_string(),
            char_count: text.chars().count(),
            text,
            page_count,
        })
    }
}

/// Something that can split a PDF byte stream into per-page text.
pub trait PdfBackend: Send + Sync {
    fn page_texts(&self, bytes: &[u8]) -> Result<Vec<String>, ExtractError>;
}

/// Default backend built on `lopdf`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LopdfBackend;

impl PdfBackend for LopdfBackend {
    fn page_texts(&self, bytes: &[u8]) -> Result<Vec<String>, ExtractError> {
        // lopdf can panic on hostile inputs; treat that as a parse failure.
        let loaded = panic::catch_unwind(AssertUnwindSafe(|| lopdf::Document::load_mem(bytes)))
            .map_err(|_| ExtractError::Malformed("parser panicked".into()))?;
        let doc = match loaded {
            Ok(doc) => doc,
            Err(lopdf::Error::InvalidPassword | lopdf::Error::Decryption(_)) => {
                return Err(ExtractError::EncryptedPdf);
            }
            Err(e) => return Err(ExtractError::Malformed(e.to_string())),
        };
        // Files openable with the empty user password come back decrypted.
        if doc.is_encrypted() {
            return Err(ExtractError::EncryptedPdf);
        }
        let pages: Vec<u32> = doc.get_pages().keys().copied().collect();
        Ok(pages
            .into_iter()
            .map(|page| {
                panic::catch_unwind(AssertUnwindSafe(|| doc.extract_text(&[page])))
                    .ok()
                    .and_then(Result::ok)
                    .unwrap_or_default()
            })
            .collect())
    }
}

const HEADER_SEARCH_WINDOW: usize = 1024;

fn has_pdf_header(bytes: &[u8]) -> bool {
    let window = &bytes[..bytes.len().min(HEADER_SEARCH_WINDOW)];
    window.windows(5).any(|w| w == b"%PDF-")
}

/// Extracts text with the default backend.
pub fn extract_text(bytes: &[u8], doc_id: &str, title: &str) -> Result<ExtractedDocument, ExtractError> {
    extract_text_with(&LopdfBackend, bytes, doc_id, title)
}

/// Pages are joined in order with a single `\n`, then normalized.
pub fn extract_text_with(
    backend: &dyn PdfBackend,
    bytes: &[u8],
    doc_id: &str,
    title: &str,
) -> Result<ExtractedDocument, ExtractError> {
    if !has_pdf_header(bytes) {
        return Err(ExtractError::NotAPdf);
    }
    let pages = backend.page_texts(bytes)?;
    let page_count = pages.len();
    let text = normalize(&pages.join("\n"));
    ExtractedDocument::new(doc_id, title, text, page_count)
}

/// Pass-through for `.txt` sources. Invalid UTF-8 sequences become U+FFFD.
pub fn plain_text_document(bytes: &[u8], doc_id: &str, title: &str) -> Result<ExtractedDocument, ExtractError> {
    let text = normalize(&String::from_utf8_lossy(bytes));
    ExtractedDocument::new(doc_id, title, text, 1)
}

/// Normalizes line endings to `\n`, drops NULs, and collapses any run of three
/// or more blank lines to a single blank line.
pub fn normalize(raw: &str) -> String {
    let unified = raw.replace("\r\n", "\n").replace('\r', "\n").replace('\0', "");
    let mut out = String::with_capacity(unified.len());
    let mut blank_run = 0usize;
    let mut pending_blanks: Vec<&str> = Vec::new();

    let flush = |out: &mut String, pending: &mut Vec<&str>, run: usize| {
        if run >= 3 {
            out.push('\n');
        } else {
            for line in pending.iter() {
                out.push_str(line);
                out.push('\n');
            }
        }
        pending.clear();
    };

    let mut lines = unified.split('\n').peekable();
    while let Some(line) = lines.next() {
        let last = lines.peek().is_none();
        if line.trim().is_empty() && !last {
            blank_run += 1;
            pending_blanks.push(line);
            continue;
        }
        flush(&mut out, &mut pending_blanks, blank_run);
        blank_run = 0;
        out.push_str(line);
        if !last {
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_pdf_bytes() {
        assert_eq!(extract_text(b"hello", "d", "t"), Err(ExtractError::NotAPdf));
        assert_eq!(extract_text(b"", "d", "t"), Err(ExtractError::NotAPdf));
    }

    #[test]
    fn header_with_garbage_but_no_body_is_malformed() {
        assert!(matches!(
            extract_text(b"%PDF-1.7\n garbage", "d", "t"),
            Err(ExtractError::Malformed(_))
        ));
    }

    #[test]
    fn normalize_line_endings_and_nul() {
        assert_eq!(normalize("a\r\nb\rc\0d"), "a\nb\ncd");
    }

    #[test]
    fn normalize_collapses_three_or_more_blank_lines() {
        assert_eq!(normalize("a\n\nb"), "a\n\nb");
        assert_eq!(normalize("a\n\n\nb"), "a\n\n\nb");
        // three blank lines between a and b
        assert_eq!(normalize("a\n\n\n\nb"), "a\n\nb");
        assert_eq!(normalize("a\n  \n\t\n \n\n\nb"), "a\n\nb");
        assert_eq!(normalize("a\n"), "a\n");
    }

    #[test]
    fn plain_text_passes_through() {
        let doc = plain_text_document("héllo\r\nworld".as_bytes(), "h1", "notes").unwrap();
        assert_eq!(doc.text, "héllo\nworld");
        assert_eq!(doc.char_count, 11);
        assert_eq!(doc.page_count, 1);
        assert_eq!(plain_text_document(b" \n\n", "h", "t"), Err(ExtractError::NoExtractableText));
    }

    struct FixedPages(Vec<&'static str>);

    impl PdfBackend for FixedPages {
        fn page_texts(&self, _: &[u8]) -> Result<Vec<String>, ExtractError> {
            Ok(self.0.iter().map(|s| s.to_string()).collect())
        }
    }

    #[test]
    fn pages_joined_with_single_newline() {
        let backend = FixedPages(vec!["one", "two", "three"]);
        let doc = extract_text_with(&backend, b"%PDF-1.4", "d", "t").unwrap();
        assert_eq!(doc.text, "one\ntwo\nthree");
        assert_eq!(doc.page_count, 3);
    }

    #[test]
    fn whitespace_only_pages_mean_no_text() {
        let backend = FixedPages(vec!["  ", "\n"]);
        assert_eq!(
            extract_text_with(&backend, b"%PDF-1.4", "d", "t"),
            Err(ExtractError::NoExtractableText)
        );
    }
}
