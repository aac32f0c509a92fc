//! `kzb`: HTTP service and command-line front end over `kzb-core`.

pub mod api;
pub mod cli;
mod error;

use kzb_core::{ConfigError, ProviderError, SessionError};
use thiserror::Error;

pub use api::{AppState, router, serve};
pub use error::ApiError;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Session(#[from] SessionError),
}
