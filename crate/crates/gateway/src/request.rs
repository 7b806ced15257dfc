//! Wire formats for the three provider styles.

use serde_json::{json, Map, Value};

use crate::{GatewayError, ModelProfile, ProviderKind, Usage};

/// Anthropic requires `max_tokens`; this is used when the profile has none.
pub const DEFAULT_ANTHROPIC_MAX_TOKENS: u32 = 1024;

pub const ANTHROPIC_VERSION: &str = "2023-06-01";

/// Builds the request body for `profile`. Optional sampling fields the
/// profile leaves unset are absent from the body, never `null`.
pub fn build_request(profile: &ModelProfile, prompt: &str, max_tokens: Option<u32>) -> Value {
    let max_tokens = max_tokens.or(profile.max_tokens);
    let mut sampling = Map::new();
    sampling.insert(
        "temperature".into(),
        Value::Number(profile.sampling.temperature.clone()),
    );
    if let Some(top_p) = &profile.sampling.top_p {
        sampling.insert("top_p".into(), Value::Number(top_p.clone()));
    }
    if let Some(top_k) = profile.sampling.top_k {
        sampling.insert("top_k".into(), json!(top_k));
    }

    match profile.provider {
        ProviderKind::OpenaiStyle => {
            let mut body = Map::new();
            body.insert("model".into(), json!(profile.model));
            body.insert("messages".into(), json!([{ "role": "user", "content": prompt }]));
            body.extend(sampling);
            if let Some(n) = max_tokens {
                body.insert("max_tokens".into(), json!(n));
            }
            Value::Object(body)
        }
        ProviderKind::AnthropicStyle => {
            let mut body = Map::new();
            body.insert("model".into(), json!(profile.model));
            body.insert(
                "max_tokens".into(),
                json!(max_tokens.unwrap_or(DEFAULT_ANTHROPIC_MAX_TOKENS)),
            );
            body.insert("messages".into(), json!([{ "role": "user", "content": prompt }]));
            body.extend(sampling);
            Value::Object(body)
        }
        ProviderKind::GenericHttp => {
            let mut params = sampling;
            if let Some(n) = max_tokens {
                params.insert("max_tokens".into(), json!(n));
            }
            json!({ "model": profile.model, "prompt": prompt, "params": params })
        }
    }
}

/// Where to send requests for `profile`. A mock endpoint replaces the
/// profile URL with `<mock>/chat/completions`, `<mock>/messages` or
/// `<mock>/generate` depending on the provider style.
pub fn endpoint_url(profile: &ModelProfile, mock_endpoint: Option<&str>) -> String {
    match mock_endpoint {
        None => profile.endpoint.clone(),
        Some(base) => {
            let base = base.trim_end_matches('/');
            let path = match profile.provider {
                ProviderKind::OpenaiStyle => "chat/completions",
                ProviderKind::AnthropicStyle => "messages",
                ProviderKind::GenericHttp => "generate",
            };
            format!("{base}/{path}")
        }
    }
}

/// Pulls reply text and usage out of a provider response body.
pub fn extract_completion(profile: &ModelProfile, body: &Value) -> Result<(String, Option<Usage>), GatewayError> {
    let malformed = |what: &str| GatewayError::MalformedResponse(format!("{what} (profile `{}`)", profile.id));
    let (text, usage) = match profile.provider {
        ProviderKind::OpenaiStyle => {
            let text = body
                .pointer("/choices/0/message/content")
                .and_then(Value::as_str)
                .ok_or_else(|| malformed("missing choices[0].message.content"))?
                .to_string();
            let usage = body.get("usage").map(|u| Usage {
                input_tokens: u.get("prompt_tokens").and_then(Value::as_u64),
                output_tokens: u.get("completion_tokens").and_then(Value::as_u64),
            });
            (text, usage)
        }
        ProviderKind::AnthropicStyle => {
            let blocks = body
                .get("content")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed("missing content array"))?;
            let text: String = blocks
                .iter()
                .filter(|b| b.get("type").and_then(Value::as_str).unwrap_or("text") == "text")
                .filter_map(|b| b.get("text").and_then(Value::as_str))
                .collect();
            let usage = body.get("usage").map(|u| Usage {
                input_tokens: u.get("input_tokens").and_then(Value::as_u64),
                output_tokens: u.get("output_tokens").and_then(Value::as_u64),
            });
            (text, usage)
        }
        ProviderKind::GenericHttp => {
            let pointer = profile.response_pointer.as_deref().unwrap_or("/text");
            let text = match body.pointer(pointer) {
                Some(Value::String(s)) => s.clone(),
                // Replicate-style outputs arrive as a list of chunks.
                Some(Value::Array(parts)) => parts.iter().filter_map(Value::as_str).collect(),
                _ => return Err(malformed(&format!("nothing usable at `{pointer}`"))),
            };
            (text, None)
        }
    };
    if text.trim().is_empty() {
        return Err(malformed("empty completion text"));
    }
    Ok((text, usage))
}
