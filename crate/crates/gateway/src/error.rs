use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("unknown model profile `{0}`")]
    UnknownProfile(String),
    /// Missing credential or a 401/403 from the provider. Never retried.
    #[error("authentication failed for profile `{profile}`: {reason}")]
    Auth { profile: String, reason: String },
    #[error("gave up after {attempts} attempts: {last_error}")]
    ExhaustedRetries { attempts: u32, last_error: String },
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    /// A non-retryable HTTP status other than 401/403.
    #[error("provider rejected the request with HTTP {status}: {body}")]
    Rejected { status: u16, body: String },
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profiles file is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("profile `{profile}`: {reason}")]
    Invalid { profile: String, reason: String },
    #[error("duplicate profile id `{0}`")]
    Duplicate(String),
}
