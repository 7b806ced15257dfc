//! Agents: scripted policies and LLM-backed players behind one interface.

mod parse;
mod policy;

use std::fmt;
use std::sync::Arc;

use agentgame_gateway::{ChatBackend, CompletionRequest, GatewayError};
use thiserror::Error;

pub use parse::{parse_strategy_response, ParseFailure};
pub use policy::{GameView, HistoryView, Policy, UnknownPolicy};

use crate::payoff::PayoffMatrix;

pub const DEFAULT_RETRY_BUDGET: u32 = 3;

/// Prefix of the config `llm` field that selects scripted agents.
pub const SCRIPTED_PREFIX: &str = "scripted:";

#[derive(Clone)]
pub enum AgentBackend {
    /// `seed` is present iff the policy is stochastic.
    Scripted { policy: Policy, seed: Option<u64> },
    Llm {
        profile: String,
        client: Arc<dyn ChatBackend>,
    },
}

impl fmt::Debug for AgentBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentBackend::Scripted { policy, seed } => f
                .debug_struct("Scripted")
                .field("policy", policy)
                .field("seed", seed)
                .finish(),
            AgentBackend::Llm { profile, .. } => f.debug_struct("Llm").field("profile", profile).finish(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AgentHandle {
    pub name: String,
    pub personality: String,
    pub language: String,
    pub backend: AgentBackend,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRequest {
    pub prompt: String,
    pub strategy_ids: Vec<String>,
    /// Localized labels, parallel to `strategy_ids`.
    pub labels: Vec<String>,
    /// Appended to every attempt, e.g. "Answer with exactly one of: ...".
    pub answer_instruction: String,
    /// Appended after a reply that could not be parsed.
    pub retry_notice: String,
    pub retry_budget: u32,
    /// The game matrix and the deciding player's index, for policies that
    /// reason about payoffs.
    pub game: Option<(Arc<PayoffMatrix<f64>>, usize)>,
}

impl DecisionRequest {
    fn attempt_prompt(&self, attempt: u32) -> String {
        let mut p = format!("{}\n\n{}", self.prompt.trim_end(), self.answer_instruction);
        if attempt > 0 {
            p.push_str("\n\n");
            p.push_str(&self.retry_notice);
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub strategy: String,
    /// Raw replies, one per attempt; empty for scripted agents.
    pub replies: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error("no usable answer after {attempts} attempts: {last}")]
    Exhausted {
        attempts: u32,
        last: ParseFailure,
        replies: Vec<String>,
    },
    #[error(transparent)]
    Backend(#[from] GatewayError),
    #[error("a decision needs at least two strategies")]
    TooFewStrategies,
}

/// Returns one strategy id from `request.strategy_ids`.
///
/// Scripted agents ignore the prompt. LLM agents get the prompt plus the
/// answer instruction; an unparseable reply is retried up to
/// `retry_budget` times with the retry notice appended.
pub fn decide(
    agent: &AgentHandle,
    request: &DecisionRequest,
    view: &HistoryView,
    round: u32,
) -> Result<Decision, DecisionError> {
    if request.strategy_ids.len() < 2 {
        return Err(DecisionError::TooFewStrategies);
    }
    match &agent.backend {
        AgentBackend::Scripted { policy, seed } => Ok(Decision {
            strategy: policy.decide(
                view,
                *seed,
                round,
                &request.strategy_ids,
                request.game.as_ref().map(|(matrix, player)| GameView {
                    matrix,
                    player: *player,
                }),
            ),
            replies: Vec::new(),
        }),
        AgentBackend::Llm { profile, client } => {
            let mut replies = Vec::new();
            let mut last = ParseFailure::NoMatch;
            for attempt in 0..=request.retry_budget {
                let prompt = request.attempt_prompt(attempt);
                let reply = client.complete(&CompletionRequest::new(profile.clone(), prompt))?.text;
                let parsed = parse_strategy_response(&reply, &request.strategy_ids, &request.labels);
                replies.push(reply);
                match parsed {
                    Ok(strategy) => return Ok(Decision { strategy, replies }),
                    Err(e) => {
                        log::debug!("{}: attempt {} unparseable: {e}", agent.name, attempt + 1);
                        last = e;
                    }
                }
            }
            Err(DecisionError::Exhausted {
                attempts: request.retry_budget + 1,
                last,
                replies,
            })
        }
    }
}

/// One free-text message for the opponent. Scripted agents stay silent.
pub fn compose_message(agent: &AgentHandle, prompt: &str) -> Result<String, DecisionError> {
    match &agent.backend {
        AgentBackend::Scripted { .. } => Ok(String::new()),
        AgentBackend::Llm { profile, client } => {
            let reply = client.complete(&CompletionRequest::new(profile.clone(), prompt))?;
            Ok(reply.text.trim().to_string())
        }
    }
}

/// What the `llm` config field selects.
#[derive(Clone, Debug, PartialEq)]
pub enum LlmChoice {
    /// One policy for every agent, or one per agent in order.
    Scripted(Vec<Policy>),
    Profile(String),
}

impl LlmChoice {
    pub fn parse(llm: &str) -> Result<Self, FactoryError> {
        match llm.trim().strip_prefix(SCRIPTED_PREFIX) {
            Some(list) => {
                let policies = list
                    .split(',')
                    .map(|p| p.parse::<Policy>().map_err(|e| FactoryError::UnknownPolicy(e.0)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(LlmChoice::Scripted(policies))
            }
            None => Ok(LlmChoice::Profile(llm.trim().to_string())),
        }
    }
}

/// Everything a factory needs to build one agent of one game.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSpec {
    pub index: usize,
    pub name: String,
    pub personality: String,
    pub language: String,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum FactoryError {
    #[error("unknown scripted policy `{0}`")]
    UnknownPolicy(String),
    #[error("{policies} scripted policies given for agent #{index}")]
    PolicyCount { policies: usize, index: usize },
    #[error("unknown model profile `{0}`")]
    UnknownProfile(String),
    #[error("profile `{0}` needs a chat backend but none is configured")]
    NoBackend(String),
}

pub trait AgentFactory: Sync {
    fn build(&self, spec: &AgentSpec) -> Result<AgentHandle, FactoryError>;
}

/// Builds agents according to the config `llm` field.
pub struct ConfigAgentFactory {
    choice: LlmChoice,
    client: Option<Arc<dyn ChatBackend>>,
}

impl ConfigAgentFactory {
    pub fn new(llm: &str, client: Option<Arc<dyn ChatBackend>>) -> Result<Self, FactoryError> {
        Ok(ConfigAgentFactory {
            choice: LlmChoice::parse(llm)?,
            client,
        })
    }

    pub fn choice(&self) -> &LlmChoice {
        &self.choice
    }
}

impl AgentFactory for ConfigAgentFactory {
    fn build(&self, spec: &AgentSpec) -> Result<AgentHandle, FactoryError> {
        let backend = match &self.choice {
            LlmChoice::Scripted(policies) => {
                let policy = match policies.as_slice() {
                    [only] => *only,
                    many => *many.get(spec.index).ok_or(FactoryError::PolicyCount {
                        policies: many.len(),
                        index: spec.index,
                    })?,
                };
                AgentBackend::Scripted {
                    policy,
                    seed: policy.is_stochastic().then_some(spec.seed),
                }
            }
            LlmChoice::Profile(id) => {
                let client = self.client.clone().ok_or_else(|| FactoryError::NoBackend(id.clone()))?;
                if !client.has_profile(id) {
                    return Err(FactoryError::UnknownProfile(id.clone()));
                }
                AgentBackend::Llm {
                    profile: id.clone(),
                    client,
                }
            }
        };
        Ok(AgentHandle {
            name: spec.name.clone(),
            personality: spec.personality.clone(),
            language: spec.language.clone(),
            backend,
        })
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use std::collections::VecDeque;
    use std::sync::Mutex;
    use std::time::Duration;

    use agentgame_gateway::{ChatBackend, CompletionRequest, CompletionResult, GatewayError};

    /// Replays canned replies and records every prompt it receives.
    #[derive(Default)]
    pub struct CannedBackend {
        pub replies: Mutex<VecDeque<String>>,
        pub prompts: Mutex<Vec<String>>,
    }

    impl CannedBackend {
        pub fn new(replies: &[&str]) -> Self {
            CannedBackend {
                replies: Mutex::new(replies.iter().map(|s| s.to_string()).collect()),
                prompts: Mutex::default(),
            }
        }
    }

    impl ChatBackend for CannedBackend {
        fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, GatewayError> {
            self.prompts.lock().unwrap().push(req.prompt.clone());
            let text = self
                .replies
                .lock()
                .unwrap()
                .pop_front()
                .ok_or(GatewayError::ExhaustedRetries {
                    attempts: 1,
                    last_error: "no canned reply left".into(),
                })?;
            Ok(CompletionResult {
                text,
                usage: None,
                attempts: 1,
                latency: Duration::ZERO,
            })
        }

        fn has_profile(&self, id: &str) -> bool {
            id == "canned"
        }
    }
}
