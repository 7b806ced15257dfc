use std::time::Duration;

use agentgame_gateway::{
    ChatBackend, CompletionRequest, Gateway, GatewayError, ModelProfile, ProviderKind, RetryPolicy, Sampling,
};
use mockito::{Matcher, Server};
use serde_json::json;

fn fast_retry(budget: u32) -> RetryPolicy {
    RetryPolicy::default()
        .with_budget(budget)
        .with_base(Duration::from_millis(1))
}

fn openai_reply(text: &str) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

fn profile(server: &Server, kind: ProviderKind, path: &str) -> ModelProfile {
    ModelProfile::new(
        "test",
        kind,
        "gpt-4",
        format!("{}{path}", server.url()),
        Sampling::new(0.3).with_top_p(1.0),
    )
}

#[test]
fn sampling_values_reach_the_wire() {
    let mut server = Server::new();
    let mock = server
        .mock("POST", "/v1/chat/completions")
        .match_body(Matcher::PartialJson(json!({
            "model": "gpt-4",
            "temperature": 0.3,
            "top_p": 1.0,
            "messages": [{"role": "user", "content": "pick one"}]
        })))
        .with_body(openai_reply("Option A"))
        .create();
    let gw = Gateway::builder(vec![profile(
        &server,
        ProviderKind::OpenaiStyle,
        "/v1/chat/completions",
    )])
    .build();
    let out = gw.complete(&CompletionRequest::new("test", "pick one")).unwrap();
    assert_eq!(out.text, "Option A");
    assert_eq!(out.attempts, 1);
    mock.assert();
}

#[test]
fn rate_limit_then_success_counts_two_attempts() {
    let mut server = Server::new();
    let limited = server
        .mock("POST", "/chat/completions")
        .with_status(429)
        .expect(1)
        .create();
    let ok = server
        .mock("POST", "/chat/completions")
        .with_body(openai_reply("Option B"))
        .expect(1)
        .create();
    let gw = Gateway::builder(vec![profile(&server, ProviderKind::OpenaiStyle, "/chat/completions")])
        .retry(fast_retry(5))
        .build();
    let out = gw.complete(&CompletionRequest::new("test", "x")).unwrap();
    assert_eq!(out.text, "Option B");
    assert_eq!(out.attempts, 2);
    limited.assert();
    ok.assert();
}

#[test]
fn server_errors_exhaust_the_budget_exactly() {
    let mut server = Server::new();
    let failing = server
        .mock("POST", "/chat/completions")
        .with_status(503)
        .expect(4)
        .create();
    let gw = Gateway::builder(vec![profile(&server, ProviderKind::OpenaiStyle, "/chat/completions")])
        .retry(fast_retry(3))
        .build();
    let err = gw.complete(&CompletionRequest::new("test", "x")).unwrap_err();
    assert!(
        matches!(err, GatewayError::ExhaustedRetries { attempts: 4, .. }),
        "{err:?}"
    );
    failing.assert();
}

#[test]
fn unauthorized_is_not_retried() {
    let mut server = Server::new();
    let denied = server
        .mock("POST", "/chat/completions")
        .with_status(401)
        .expect(1)
        .create();
    let gw = Gateway::builder(vec![profile(&server, ProviderKind::OpenaiStyle, "/chat/completions")])
        .retry(fast_retry(5))
        .build();
    let err = gw.complete(&CompletionRequest::new("test", "x")).unwrap_err();
    assert!(matches!(err, GatewayError::Auth { .. }));
    denied.assert();
}

#[test]
fn missing_credential_fails_before_any_request() {
    let mut server = Server::new();
    let never = server.mock("POST", Matcher::Any).expect(0).create();
    let p = profile(&server, ProviderKind::OpenaiStyle, "/chat/completions")
        .with_api_key_env("AGENTGAME_TEST_KEY_THAT_IS_NOT_SET");
    let gw = Gateway::builder(vec![p]).build();
    let err = gw.complete(&CompletionRequest::new("test", "x")).unwrap_err();
    assert!(matches!(err, GatewayError::Auth { .. }), "{err:?}");
    never.assert();
}

#[test]
fn credential_is_sent_as_header_and_never_in_debug_output() {
    let mut server = Server::new();
    std::env::set_var("AGENTGAME_TEST_KEY_SET", "sk-very-secret");
    let mock = server
        .mock("POST", "/messages")
        .match_header("x-api-key", "sk-very-secret")
        .match_header("anthropic-version", "2023-06-01")
        .with_body(json!({"content": [{"type": "text", "text": "Option A"}]}).to_string())
        .create();
    let p = profile(&server, ProviderKind::AnthropicStyle, "/messages").with_api_key_env("AGENTGAME_TEST_KEY_SET");
    let gw = Gateway::builder(vec![p]).build();
    let out = gw.complete(&CompletionRequest::new("test", "x")).unwrap();
    assert_eq!(out.text, "Option A");
    assert!(!format!("{gw:?}").contains("sk-very-secret"));
    mock.assert();
}

#[test]
fn mock_endpoint_overrides_profile_url() {
    let mut server = Server::new();
    let mock = server
        .mock("POST", "/generate")
        .match_body(Matcher::PartialJson(json!({"prompt": "hi", "params": {"top_k": 40}})))
        .with_body(json!({"text": "Option B"}).to_string())
        .create();
    let p = ModelProfile::new(
        "llama",
        ProviderKind::GenericHttp,
        "meta/meta-llama-3.1-405b-instruct",
        "https://api.replicate.invalid/v1/predictions",
        Sampling::new(0.9).with_top_p(0.6).with_top_k(40),
    )
    .with_api_key_env("AGENTGAME_TEST_UNSET_IN_MOCK_MODE");
    let gw = Gateway::builder(vec![p]).mock_endpoint(server.url()).build();
    let out = gw.complete(&CompletionRequest::new("llama", "hi")).unwrap();
    assert_eq!(out.text, "Option B");
    mock.assert();
}

#[test]
fn unknown_profile_is_reported() {
    let gw = Gateway::builder(vec![]).build();
    assert!(matches!(
        gw.complete(&CompletionRequest::new("nope", "x")),
        Err(GatewayError::UnknownProfile(p)) if p == "nope"
    ));
}
