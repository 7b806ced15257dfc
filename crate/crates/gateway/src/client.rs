use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde_json::Value;

use crate::request::{build_request, endpoint_url, extract_completion, ANTHROPIC_VERSION};
use crate::{
    ChatBackend, CompletionRequest, CompletionResult, GatewayError, Limiter, ModelProfile, ProviderKind, RetryPolicy,
};

/// API key read from the environment. Its `Debug` output is redacted.
struct Credential(String);

impl fmt::Debug for Credential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Credential(<redacted>)")
    }
}

enum Outcome {
    Done(String, Option<crate::Usage>),
    Transient(String),
    Fatal(GatewayError),
}

/// Shared, thread-safe completion client.
pub struct Gateway {
    profiles: HashMap<String, ModelProfile>,
    agent: ureq::Agent,
    retry: RetryPolicy,
    mock_endpoint: Option<String>,
    max_in_flight: usize,
    limiters: Mutex<HashMap<String, Arc<Limiter>>>,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("profiles", &self.profiles.keys().collect::<Vec<_>>())
            .field("retry", &self.retry)
            .field("mock_endpoint", &self.mock_endpoint)
            .field("max_in_flight", &self.max_in_flight)
            .finish()
    }
}

pub struct GatewayBuilder {
    profiles: Vec<ModelProfile>,
    retry: RetryPolicy,
    mock_endpoint: Option<String>,
    max_in_flight: usize,
    timeout: Duration,
}

impl GatewayBuilder {
    pub fn retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Routes every profile to a local server (see [`endpoint_url`]).
    /// Credentials become optional in this mode.
    pub fn mock_endpoint(mut self, url: impl Into<String>) -> Self {
        self.mock_endpoint = Some(url.into());
        self
    }

    /// In-flight request cap per provider host. Defaults to 4.
    pub fn max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    pub fn timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn build(self) -> Gateway {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        Gateway {
            profiles: self.profiles.into_iter().map(|p| (p.id.clone(), p)).collect(),
            agent,
            retry: self.retry,
            mock_endpoint: self.mock_endpoint,
            max_in_flight: self.max_in_flight,
            limiters: Mutex::new(HashMap::new()),
        }
    }
}

impl Gateway {
    pub fn builder(profiles: Vec<ModelProfile>) -> GatewayBuilder {
        GatewayBuilder {
            profiles,
            retry: RetryPolicy::default(),
            mock_endpoint: None,
            max_in_flight: 4,
            timeout: Duration::from_secs(120),
        }
    }

    pub fn profile(&self, id: &str) -> Option<&ModelProfile> {
        self.profiles.get(id)
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        self.retry
    }

    fn credential(&self, profile: &ModelProfile) -> Result<Option<Credential>, GatewayError> {
        let Some(var) = &profile.api_key_env else {
            return Ok(None);
        };
        match std::env::var(var) {
            Ok(v) if !v.is_empty() => Ok(Some(Credential(v))),
            _ if self.mock_endpoint.is_some() => Ok(None),
            _ => Err(GatewayError::Auth {
                profile: profile.id.clone(),
                reason: format!("environment variable {var} is not set"),
            }),
        }
    }

    fn limiter_for(&self, url: &str) -> Arc<Limiter> {
        let host = provider_host(url);
        let mut map = self.limiters.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(host)
            .or_insert_with(|| Arc::new(Limiter::new(self.max_in_flight)))
            .clone()
    }

    fn attempt(&self, profile: &ModelProfile, url: &str, body: &str, credential: Option<&Credential>) -> Outcome {
        let mut req = self.agent.post(url).header("content-type", "application/json");
        if let Some(Credential(key)) = credential {
            req = match profile.provider {
                ProviderKind::AnthropicStyle => req
                    .header("x-api-key", key.as_str())
                    .header("anthropic-version", ANTHROPIC_VERSION),
                _ => req.header("authorization", format!("Bearer {key}")),
            };
        }
        let mut resp = match req.send(body) {
            Ok(r) => r,
            Err(e) => return Outcome::Transient(format!("transport error: {e}")),
        };
        let status = resp.status().as_u16();
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Outcome::Transient(format!("reading body: {e}")),
        };
        match status {
            200..=299 => {
                let json: Value = match serde_json::from_str(&text) {
                    Ok(v) => v,
                    Err(e) => return Outcome::Fatal(GatewayError::MalformedResponse(format!("body is not JSON: {e}"))),
                };
                match extract_completion(profile, &json) {
                    Ok((text, usage)) => Outcome::Done(text, usage),
                    Err(e) => Outcome::Fatal(e),
                }
            }
            401 | 403 => Outcome::Fatal(GatewayError::Auth {
                profile: profile.id.clone(),
                reason: format!("HTTP {status}"),
            }),
            408 | 429 | 500..=599 => Outcome::Transient(format!("HTTP {status}")),
            _ => Outcome::Fatal(GatewayError::Rejected {
                status,
                body: truncate(&text, 200),
            }),
        }
    }
}

impl ChatBackend for Gateway {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, GatewayError> {
        let profile = self
            .profiles
            .get(&request.profile)
            .ok_or_else(|| GatewayError::UnknownProfile(request.profile.clone()))?;
        let credential = self.credential(profile)?;
        let url = endpoint_url(profile, self.mock_endpoint.as_deref());
        let body = build_request(profile, &request.prompt, request.max_output_tokens).to_string();
        let limiter = self.limiter_for(&url);
        let started = Instant::now();
        let mut rng = rand::rng();
        let mut last_error = String::new();

        for attempt in 1..=self.retry.max_attempts() {
            let outcome = {
                let _permit = limiter.acquire();
                self.attempt(profile, &url, &body, credential.as_ref())
            };
            match outcome {
                Outcome::Done(text, usage) => {
                    debug!("profile {} answered after {attempt} attempt(s)", profile.id);
                    return Ok(CompletionResult {
                        text,
                        usage,
                        attempts: attempt,
                        latency: started.elapsed(),
                    });
                }
                Outcome::Fatal(e) => return Err(e),
                Outcome::Transient(reason) => {
                    warn!("profile {} attempt {attempt}: {reason}", profile.id);
                    last_error = reason;
                    if attempt < self.retry.max_attempts() {
                        std::thread::sleep(self.retry.delay(attempt - 1, &mut rng));
                    }
                }
            }
        }
        Err(GatewayError::ExhaustedRetries {
            attempts: self.retry.max_attempts(),
            last_error,
        })
    }

    fn has_profile(&self, profile: &str) -> bool {
        self.profiles.contains_key(profile)
    }
}

fn provider_host(url: &str) -> String {
    let rest = url.split_once("://").map_or(url, |(_, r)| r);
    rest.split('/').next().unwrap_or(rest).to_string()
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{}…", &s[..i]),
        None => s.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn host_extraction() {
        assert_eq!(
            provider_host("https://api.openai.com/v1/chat/completions"),
            "api.openai.com"
        );
        assert_eq!(provider_host("http://127.0.0.1:8080/messages"), "127.0.0.1:8080");
    }

    #[test]
    fn credential_debug_is_redacted() {
        let c = Credential("sk-secret-value".into());
        assert!(!format!("{c:?}").contains("sk-secret"));
    }
}
