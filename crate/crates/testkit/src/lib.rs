//! Test fixtures: mock Zotero and provider servers, PDF builders and a small
//! planted-fact corpus.

pub mod corpus;
pub mod oracle;
pub mod pdf;
pub mod provider;
mod server;
pub mod zotero;

pub use provider::{MockProvider, ProviderBehavior};
pub use server::RecordedRequest;
pub use zotero::{MockItem, MockLibrary, MockZotero};
