//! Model profiles: which provider to call, with which model version and
//! sampling parameters, and where the credential lives.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::ProfileError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    /// `/chat/completions` with a `messages` array (OpenAI, Mistral, ...).
    OpenaiStyle,
    /// `/messages` with the Anthropic schema.
    AnthropicStyle,
    /// `{model, prompt, params}` in, text at `response_pointer` out.
    GenericHttp,
}

/// Sampling parameters. Numbers are kept as parsed so they reach the wire
/// with the same textual form they had in the profiles file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub temperature: Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_p: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<u32>,
}

impl Sampling {
    pub fn new(temperature: f64) -> Self {
        Self {
            temperature: number(temperature),
            top_p: None,
            top_k: None,
        }
    }

    pub fn with_top_p(mut self, top_p: f64) -> Self {
        self.top_p = Some(number(top_p));
        self
    }

    pub fn with_top_k(mut self, top_k: u32) -> Self {
        self.top_k = Some(top_k);
        self
    }
}

fn number(x: f64) -> Number {
    Number::from_f64(x).unwrap_or_else(|| Number::from(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub id: String,
    pub provider: ProviderKind,
    /// Model version string sent in the request body.
    pub model: String,
    /// Full URL of the completion endpoint.
    pub endpoint: String,
    pub sampling: Sampling,
    /// Name of the environment variable holding the API key. The value is
    /// read at call time and never stored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    /// JSON pointer to the reply text for `generic_http` providers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_pointer: Option<String>,
}

impl ModelProfile {
    pub fn new(
        id: impl Into<String>,
        provider: ProviderKind,
        model: impl Into<String>,
        endpoint: impl Into<String>,
        sampling: Sampling,
    ) -> Self {
        Self {
            id: id.into(),
            provider,
            model: model.into(),
            endpoint: endpoint.into(),
            sampling,
            api_key_env: None,
            max_tokens: None,
            response_pointer: None,
        }
    }

    pub fn with_api_key_env(mut self, var: impl Into<String>) -> Self {
        self.api_key_env = Some(var.into());
        self
    }

    /// Checks temperature ≥ 0 and top_p ∈ (0, 1].
    pub fn validate(&self) -> Result<(), ProfileError> {
        let invalid = |reason: String| ProfileError::Invalid {
            profile: self.id.clone(),
            reason,
        };
        if self.id.trim().is_empty() {
            return Err(invalid("empty profile id".into()));
        }
        match self.sampling.temperature.as_f64() {
            Some(t) if t >= 0.0 && t.is_finite() => {}
            _ => {
                return Err(invalid(format!(
                    "temperature {} must be ≥ 0",
                    self.sampling.temperature
                )))
            }
        }
        if let Some(p) = &self.sampling.top_p {
            match p.as_f64() {
                Some(v) if v > 0.0 && v <= 1.0 => {}
                _ => return Err(invalid(format!("top_p {p} must lie in (0, 1]"))),
            }
        }
        if let Some(ptr) = &self.response_pointer {
            if !ptr.is_empty() && !ptr.starts_with('/') {
                return Err(invalid(format!("response_pointer `{ptr}` is not a JSON pointer")));
            }
        }
        Ok(())
    }
}

/// Parses a profiles file: a JSON list of [`ModelProfile`] records.
pub fn load_profiles(text: &str) -> Result<Vec<ModelProfile>, ProfileError> {
    let profiles: Vec<ModelProfile> = serde_json::from_str(text)?;
    let mut seen = HashSet::new();
    for p in &profiles {
        p.validate()?;
        if !seen.insert(p.id.as_str()) {
            return Err(ProfileError::Duplicate(p.id.clone()));
        }
    }
    Ok(profiles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_profile_list() {
        let text = r#"[
            {"id": "mistral-large", "provider": "openai_style", "model": "mistral-large-latest",
             "endpoint": "https://api.mistral.ai/v1/chat/completions",
             "sampling": {"temperature": 0.3, "top_p": 1}, "api_key_env": "MISTRAL_API_KEY"}
        ]"#;
        let profiles = load_profiles(text).unwrap();
        assert_eq!(profiles.len(), 1);
        assert_eq!(profiles[0].sampling.top_p.as_ref().unwrap().to_string(), "1");
        assert_eq!(profiles[0].sampling.temperature.to_string(), "0.3");
        assert_eq!(profiles[0].sampling.top_k, None);
    }

    #[test]
    fn rejects_negative_temperature() {
        let p = ModelProfile::new("x", ProviderKind::OpenaiStyle, "m", "http://h", Sampling::new(-0.1));
        assert!(matches!(p.validate(), Err(ProfileError::Invalid { .. })));
    }

    #[test]
    fn rejects_top_p_out_of_range() {
        for bad in [0.0, 1.5] {
            let p = ModelProfile::new(
                "x",
                ProviderKind::OpenaiStyle,
                "m",
                "http://h",
                Sampling::new(1.0).with_top_p(bad),
            );
            assert!(p.validate().is_err(), "top_p {bad} accepted");
        }
        let ok = ModelProfile::new(
            "x",
            ProviderKind::OpenaiStyle,
            "m",
            "http://h",
            Sampling::new(1.0).with_top_p(1.0),
        );
        ok.validate().unwrap();
    }

    #[test]
    fn duplicate_ids_rejected() {
        let one = r#"{"id": "a", "provider": "generic_http", "model": "m", "endpoint": "http://h", "sampling": {"temperature": 1}}"#;
        let text = format!("[{one},{one}]");
        assert!(matches!(load_profiles(&text), Err(ProfileError::Duplicate(id)) if id == "a"));
    }
}
