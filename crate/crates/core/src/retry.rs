use std::future::Future;
use std::time::Duration;

use reqwest::header::{HeaderMap, RETRY_AFTER};
use reqwest::{Response, StatusCode};

/// Retry schedule for 429 and 5xx responses.
///
/// The delay before retry `n` (0-based) is `base_delay * 2^n`, so the default
/// waits 1s, 2s, then 4s. A `Retry-After` header from the server takes
/// precedence, capped at `max_delay`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_secs(1),
            max_delay: Duration::from_secs(60),
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self {
            max_retries: 0,
            ..Self::default()
        }
    }

    /// Same retry count with millisecond-scale delays, for tests.
    pub fn fast() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_millis(1),
            max_delay: Duration::from_millis(20),
        }
    }

    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }

    fn delay_for(&self, retry: u32, headers: &HeaderMap) -> Duration {
        retry_after(headers)
            .map(|d| d.min(self.max_delay))
            .unwrap_or_else(|| self.backoff(retry))
    }
}

pub(crate) fn is_retryable(status: StatusCode) -> bool {
    status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error()
}

/// Parses a delta-seconds `Retry-After` value. HTTP-date values are ignored.
pub(crate) fn retry_after(headers: &HeaderMap) -> Option<Duration> {
    headers
        .get(RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse::<u64>()
        .ok()
        .map(Duration::from_secs)
}

/// Sends a request, retrying on 429/5xx per `policy`.
///
/// Transport errors are not retried. The last response is returned as-is
/// once retries are exhausted, so callers map its status to their own errors.
pub(crate) async fn send_with_retry<F, Fut>(
    policy: &RetryPolicy,
    mut send: F,
) -> Result<Response, reqwest::Error>
where
    F: FnMut() -> Fut,
    Fut: Future<Output = Result<Response, reqwest::Error>>,
{
    let mut retry = 0;
    loop {
        let response = send().await?;
        if !is_retryable(response.status()) || retry >= policy.max_retries {
            return Ok(response);
        }
        let delay = policy.delay_for(retry, response.headers());
        tracing::debug!(status = %response.status(), ?delay, retry, "retrying request");
        tokio::time::sleep(delay).await;
        retry += 1;
    }
}
