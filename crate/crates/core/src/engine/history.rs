use serde::{Deserialize, Serialize};

use crate::config::GameSetup;
use crate::payoff::Orientation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    CompletedAllRounds,
    StopCondition,
    AgentFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based.
    pub round: u32,
    /// One strategy id per agent.
    pub strategies: Vec<String>,
    pub scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<Vec<String>>,
    /// Per agent, SHA-256 of each raw reply (LLM agents only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reply_digests: Vec<Vec<String>>,
    /// Raw replies, kept in memory only.
    #[serde(skip)]
    pub replies: Vec<Vec<String>>,
}

impl RoundRecord {
    /// `"AB"` for agent 1 on A and agent 2 on B.
    pub fn combination(&self) -> String {
        self.strategies.concat()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureInfo {
    pub round: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    pub reason: String,
}

/// Everything analytics needs about one played game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameHistory {
    pub key: String,
    pub setup: GameSetup,
    pub model: String,
    pub game_name: String,
    pub n_rounds: u32,
    pub rounds_known: bool,
    pub strategy_ids: Vec<String>,
    pub orientation: Orientation,
    /// Per-player scores for every combination, first player most significant.
    pub matrix: Vec<Vec<f64>>,
    pub records: Vec<RoundRecord>,
    pub termination: Termination,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureInfo>,
}

impl GameHistory {
    /// Cumulative score per agent.
    pub fn totals(&self) -> Vec<f64> {
        let n = self.setup.assignment.agents.len();
        let mut t = vec![0.0; n];
        for r in &self.records {
            for (acc, s) in t.iter_mut().zip(&r.scores) {
                *acc += s;
            }
        }
        t
    }

    /// Checks the structural invariants: contiguous rounds, one move per
    /// agent, scores that match the stored matrix, and a termination cause
    /// consistent with the records.
    pub fn check(&self, stop_game_when: Option<&[String]>) -> Result<(), String> {
        let players = self.setup.assignment.agents.len();
        let k = self.strategy_ids.len();
        if self.records.len() > self.n_rounds as usize {
            return Err(format!("{} records for {} rounds", self.records.len(), self.n_rounds));
        }
        for (i, r) in self.records.iter().enumerate() {
            if r.round as usize != i + 1 {
                return Err(format!("record {i} has round {}", r.round));
            }
            if r.strategies.len() != players || r.scores.len() != players {
                return Err(format!("round {}: expected {players} moves and scores", r.round));
            }
            let mut index = 0;
            for s in &r.strategies {
                let pos = self
                    .strategy_ids
                    .iter()
                    .position(|id| id == s)
                    .ok_or_else(|| format!("round {}: unknown strategy `{s}`", r.round))?;
                index = index * k + pos;
            }
            if self.matrix.get(index) != Some(&r.scores) {
                return Err(format!("round {}: scores differ from the matrix", r.round));
            }
        }
        let full = self.records.len() == self.n_rounds as usize;
        match self.termination {
            Termination::CompletedAllRounds if !full => Err("completed game is missing rounds".into()),
            Termination::StopCondition => {
                let last = self.records.last().ok_or("stopped game has no records")?;
                match stop_game_when {
                    Some(stops) if !stops.contains(&last.combination()) => {
                        Err(format!("stopped on `{}`, not a stop combination", last.combination()))
                    }
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}
