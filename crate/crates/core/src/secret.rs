use std::fmt;

use serde::{Deserialize, Serialize};

/// Marker shown in place of a secret wherever configuration is echoed back.
pub const REDACTED: &str = "***";

/// An API key or other credential.
///
/// `Debug` and `Display` never print the value; call [`Secret::expose`] at the
/// point where the raw value is put on the wire.
#[derive(Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True for values a client sends back when it only saw the redacted form.
    pub fn is_placeholder(&self) -> bool {
        self.0.is_empty() || self.0 == REDACTED
    }

    /// Replaces every occurrence of the secret in `text` with [`REDACTED`].
    pub fn scrub(&self, text: &str) -> String {
        if self.0.is_empty() {
            text.to_string()
        } else {
            text.replace(&self.0, REDACTED)
        }
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(REDACTED)
    }
}

impl fmt::Display for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(REDACTED)
    }
}

impl From<&str> for Secret {
    fn from(value: &str) -> Self {
        Self::new(value)
    }
}

impl From<String> for Secret {
    fn from(value: String) -> Self {
        Self(value)
    }
}
