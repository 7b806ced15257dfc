use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::payoff::PayoffMatrix;
use crate::seed::round_seed;

/// Past moves as one agent sees them, oldest first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HistoryView {
    pub own: Vec<String>,
    pub opponent: Vec<String>,
}

/// Deterministic strategy policies. The first strategy id plays the role of
/// defection ("A") and the second of cooperation ("B").
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    AlwaysA,
    AlwaysB,
    /// B first, then the opponent's previous move.
    TitForTat,
    /// B until the opponent plays A once, then A forever.
    GrimTrigger,
    RandomUniform,
    /// B on odd rounds, A on even rounds.
    Alternator,
    /// Opens with strategy `opening` (an index), then plays the best
    /// response to the opponent's previous move.
    BestResponse {
        opening: usize,
    },
}

/// The game a policy is playing: the matrix and its own player index.
#[derive(Clone, Copy, Debug)]
pub struct GameView<'a> {
    pub matrix: &'a PayoffMatrix<f64>,
    pub player: usize,
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown policy `{0}`")]
pub struct UnknownPolicy(pub String);

impl Policy {
    pub const ALL: [Policy; 8] = [
        Policy::AlwaysA,
        Policy::AlwaysB,
        Policy::TitForTat,
        Policy::GrimTrigger,
        Policy::RandomUniform,
        Policy::Alternator,
        Policy::BestResponse { opening: 0 },
        Policy::BestResponse { opening: 1 },
    ];

    /// `best_response:a` opens with A, `best_response:b` with B.
    pub fn id(self) -> String {
        match self {
            Policy::AlwaysA => "always_a".into(),
            Policy::AlwaysB => "always_b".into(),
            Policy::TitForTat => "tit_for_tat".into(),
            Policy::GrimTrigger => "grim_trigger".into(),
            Policy::RandomUniform => "random_uniform".into(),
            Policy::Alternator => "alternator".into(),
            Policy::BestResponse { opening } => {
                let letter = (b'a' + opening.min(25) as u8) as char;
                format!("best_response:{letter}")
            }
        }
    }

    pub fn is_stochastic(self) -> bool {
        self == Policy::RandomUniform
    }

    /// Picks a strategy id for `round` (1-based). `ids` must hold at least
    /// two entries; `seed` is only read by stochastic policies and `game`
    /// only by best response, which falls back to its opening without it.
    pub fn decide(
        self,
        view: &HistoryView,
        seed: Option<u64>,
        round: u32,
        ids: &[String],
        game: Option<GameView<'_>>,
    ) -> String {
        let (defect, cooperate) = (&ids[0], &ids[1]);
        let pick = match self {
            Policy::AlwaysA => defect,
            Policy::AlwaysB => cooperate,
            Policy::TitForTat => view.opponent.last().unwrap_or(cooperate),
            Policy::GrimTrigger => {
                if view.opponent.iter().any(|m| m == defect) {
                    defect
                } else {
                    cooperate
                }
            }
            Policy::RandomUniform => {
                let mut rng = ChaCha8Rng::seed_from_u64(round_seed(seed.unwrap_or(0), round));
                &ids[rng.random_range(0..ids.len())]
            }
            Policy::Alternator => {
                if round % 2 == 1 {
                    cooperate
                } else {
                    defect
                }
            }
            Policy::BestResponse { opening } => {
                let opening = &ids[opening.min(ids.len() - 1)];
                match (game, view.opponent.last()) {
                    (Some(g), Some(last)) => match g.matrix.strategy_index(last) {
                        Some(theirs) => {
                            let mut profile = vec![theirs; g.matrix.players()];
                            profile[g.player] = 0;
                            &g.matrix.strategy_ids()[g.matrix.best_response(g.player, &profile)]
                        }
                        None => opening,
                    },
                    _ => opening,
                }
            }
        };
        pick.clone()
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Policy {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "best_response" {
            return Ok(Policy::BestResponse { opening: 1 });
        }
        Policy::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| UnknownPolicy(s.to_string()))
    }
}
