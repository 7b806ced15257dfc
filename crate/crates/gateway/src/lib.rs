//! Provider-agnostic chat-completion client.
//!
//! A [`Gateway`] owns a set of [`ModelProfile`]s (provider style, model
//! version, endpoint, sampling parameters, credential variable) and turns a
//! prompt into a single-turn completion. Transient failures (HTTP 429, 5xx,
//! transport errors) are retried with exponential backoff and jitter; calls
//! to the same provider host share a concurrency limiter.
//!
//! Anything that needs completions should depend on the [`ChatBackend`]
//! trait rather than on `Gateway` directly, so tests can substitute a fake.

mod client;
mod error;
mod limiter;
pub mod profile;
pub mod request;
pub mod retry;

pub use client::{Gateway, GatewayBuilder};
pub use error::{GatewayError, ProfileError};
pub use limiter::Limiter;
pub use profile::{load_profiles, ModelProfile, ProviderKind, Sampling};
pub use request::{build_request, endpoint_url, extract_completion};
pub use retry::RetryPolicy;

use std::time::Duration;

/// One prompt addressed to a named profile.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletionRequest {
    pub profile: String,
    pub prompt: String,
    /// Overrides the profile's `max_tokens` when set.
    pub max_output_tokens: Option<u32>,
}

impl CompletionRequest {
    pub fn new(profile: impl Into<String>, prompt: impl Into<String>) -> Self {
        Self {
            profile: profile.into(),
            prompt: prompt.into(),
            max_output_tokens: None,
        }
    }
}

/// Token counts as reported by the provider, passed through untouched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Usage {
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompletionResult {
    /// Never empty.
    pub text: String,
    pub usage: Option<Usage>,
    /// Number of HTTP attempts made, including the successful one.
    pub attempts: u32,
    pub latency: Duration,
}

/// Anything that can answer a completion request.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, GatewayError>;

    /// Whether `profile` names something this backend can serve.
    fn has_profile(&self, profile: &str) -> bool;
}
