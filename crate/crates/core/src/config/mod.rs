//! The declarative game configuration: parsing, validation, and expansion
//! into an enumerated campaign of game setups.
//!
//! Field names follow the upstream JSON schema verbatim (`nRounds`,
//! `payoffMatrix`, ...). Fields this crate adds on top of that schema carry
//! an `x-` prefix so they cannot collide with future upstream fields:
//!
//! - `x-variantId` (top level): name of the config's own payoff variant,
//!   default `"default"`.
//! - `payoffMatrix.x-orientation`: `"penalty"` (default) or `"reward"`.
//! - `agents.x-assignment`: personality id per agent, used when
//!   `allAgentPermutations` is false.

mod expand;
mod validate;

pub use expand::{
    enumerate_game_setups, expand_agent_permutations, AgentAssignment, AgentSlot, EnumerateError, GameSetup, Variant,
    VariantParseError,
};
pub use validate::validate_config;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

pub use crate::payoff::Orientation;

/// Personality id whose sentence is left out of the prompt.
pub const NO_PERSONALITY: &str = "none";

pub const DEFAULT_VARIANT_ID: &str = "default";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameConfig {
    pub name: String,
    pub n_rounds: u32,
    pub n_rounds_is_known: bool,
    /// Model profile id, or `scripted:<policy>[,<policy>...]`.
    pub llm: String,
    pub languages: Vec<String>,
    pub all_agent_permutations: bool,
    pub agents: AgentsBlock,
    pub payoff_matrix: PayoffMatrixSpec,
    #[serde(default)]
    pub stop_game_when: Vec<String>,
    #[serde(default)]
    pub agents_communicate: bool,
    #[serde(rename = "x-variantId", default = "default_variant_id")]
    pub variant_id: String,
}

fn default_variant_id() -> String {
    DEFAULT_VARIANT_ID.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgentsBlock {
    #[serde(deserialize_with = "names_as_strings")]
    pub names: Vec<String>,
    /// language → personality id → localized personality text.
    pub personalities: IndexMap<String, IndexMap<String, String>>,
    pub opponent_personality_prob: Vec<f64>,
    #[serde(rename = "x-assignment", default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<String>>,
}

/// Agent names may be written as strings or integers.
fn names_as_strings<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Name {
        Text(String),
        Number(i64),
    }
    let raw: Vec<Name> = Vec::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|n| match n {
            Name::Text(s) => s,
            Name::Number(i) => i.to_string(),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrixSpec {
    /// weight id → value. Several combinations may share a weight.
    pub weights: IndexMap<String, f64>,
    /// language → strategy id → localized label.
    pub strategies: IndexMap<String, IndexMap<String, String>>,
    /// Combination labels, e.g. `"AB"` = player 1 plays A, player 2 plays B.
    pub combinations: Vec<String>,
    /// combination label → one weight id per player.
    pub matrix: IndexMap<String, Vec<String>>,
    #[serde(rename = "x-orientation", default)]
    pub orientation: Orientation,
}

impl PayoffMatrixSpec {
    /// Strategy ids in declaration order of the first language.
    pub fn strategy_ids(&self) -> Vec<String> {
        self.strategies
            .values()
            .next()
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default()
    }

    pub fn labels(&self, language: &str) -> Option<Vec<String>> {
        let map = self.strategies.get(language)?;
        self.strategy_ids().iter().map(|id| map.get(id).cloned()).collect()
    }
}

impl GameConfig {
    pub fn player_count(&self) -> usize {
        self.agents.names.len()
    }

    /// Personality ids in declaration order of the first language.
    pub fn personality_ids(&self) -> Vec<String> {
        self.agents
            .personalities
            .values()
            .next()
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// Localized personality text; empty for `none` or unknown ids.
    pub fn personality_text(&self, language: &str, personality: &str) -> String {
        if personality == NO_PERSONALITY {
            return String::new();
        }
        self.agents
            .personalities
            .get(language)
            .and_then(|m| m.get(personality))
            .cloned()
            .unwrap_or_default()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required field `{field}`")]
    MissingField { field: String },
    #[error("type mismatch at `{path}` (line {line}, column {column}): {message}")]
    TypeMismatch {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invariant(String),
}

/// Parses a JSON config document into a typed [`GameConfig`].
///
/// Only the `nRounds ≥ 1` invariant is enforced here; everything else is
/// reported by [`validate_config`].
pub fn parse_config(text: &str) -> Result<GameConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: GameConfig = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        classify(&path, inner)
    })?;
    if config.n_rounds < 1 {
        return Err(ConfigError::Invariant("n_rounds ≥ 1 violated".into()));
    }
    Ok(config)
}

fn classify(path: &str, err: serde_json::Error) -> ConfigError {
    use serde_json::error::Category;
    let (line, column) = (err.line(), err.column());
    let message = err.to_string();
    match err.classify() {
        Category::Syntax | Category::Eof | Category::Io => ConfigError::Syntax { line, column, message },
        Category::Data => {
            if let Some(field) = missing_field_name(&message) {
                let field = if path == "." || path.is_empty() {
                    field
                } else {
                    format!("{path}.{field}")
                };
                ConfigError::MissingField { field }
            } else {
                ConfigError::TypeMismatch {
                    path: path.to_string(),
                    line,
                    column,
                    message,
                }
            }
        }
    }
}

fn missing_field_name(message: &str) -> Option<String> {
    let rest = message.strip_prefix("missing field `")?;
    Some(rest.split('`').next()?.to_string())
}
