//! Payoff matrices over n players, the built-in presets, and the
//! dilemma-strength helper.
//!
//! Combinations are indexed in mixed radix with player 0 most significant,
//! so for strategies `[A, B]` and two players the order is AA, AB, BA, BB.
//! A combination's label is the concatenation of its strategy ids.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

/// Whether scores are penalties to minimize or rewards to maximize.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Penalty,
    Reward,
}

impl Orientation {
    /// True when `a` is strictly preferable to `b` under this orientation.
    pub fn prefers<S: Scalar>(self, a: S, b: S) -> bool {
        match self {
            Orientation::Penalty => a < b,
            Orientation::Reward => a > b,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PayoffError {
    #[error("a payoff matrix needs at least 2 strategies and 1 player")]
    TooSmall,
    #[error("expected {expected} combinations, got {got}")]
    WrongCombinationCount { expected: usize, got: usize },
    #[error("combination {index} has {got} scores for {players} players")]
    WrongArity { index: usize, got: usize, players: usize },
    #[error("duplicate strategy id `{0}`")]
    DuplicateStrategy(String),
    #[error("unknown strategy id `{0}`")]
    UnknownStrategy(String),
    #[error("combination has {got} strategies for {players} players")]
    WrongCombinationLength { got: usize, players: usize },
    #[error("dilemma strength needs a 2-strategy, 2-player penalty matrix")]
    NotADilemma,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PayoffMatrix<S> {
    strategy_ids: Vec<String>,
    players: usize,
    entries: Vec<Vec<S>>,
    orientation: Orientation,
}

impl<S: Scalar> PayoffMatrix<S> {
    /// `entries[i]` holds the per-player scores of combination `i`.
    pub fn new(
        strategy_ids: Vec<String>,
        players: usize,
        entries: Vec<Vec<S>>,
        orientation: Orientation,
    ) -> Result<Self, PayoffError> {
        if strategy_ids.len() < 2 || players == 0 {
            return Err(PayoffError::TooSmall);
        }
        for (i, id) in strategy_ids.iter().enumerate() {
            if strategy_ids[..i].contains(id) {
                return Err(PayoffError::DuplicateStrategy(id.clone()));
            }
        }
        let expected = strategy_ids.len().pow(players as u32);
        if entries.len() != expected {
            return Err(PayoffError::WrongCombinationCount {
                expected,
                got: entries.len(),
            });
        }
        if let Some((index, e)) = entries.iter().enumerate().find(|(_, e)| e.len() != players) {
            return Err(PayoffError::WrongArity {
                index,
                got: e.len(),
                players,
            });
        }
        Ok(Self {
            strategy_ids,
            players,
            entries,
            orientation,
        })
    }

    /// Two-player, two-strategy matrix with strategy ids `A` and `B`;
    /// `scores` lists AA, AB, BA, BB.
    pub fn two_by_two(scores: [(f64, f64); 4], orientation: Orientation) -> Self {
        let entries = scores.iter().map(|&(a, b)| vec![S::lit(a), S::lit(b)]).collect();
        Self::new(vec!["A".into(), "B".into()], 2, entries, orientation).expect("2x2 shape is valid")
    }

    pub fn strategy_ids(&self) -> &[String] {
        &self.strategy_ids
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn n_combinations(&self) -> usize {
        self.entries.len()
    }

    pub fn strategy_index(&self, id: &str) -> Option<usize> {
        self.strategy_ids.iter().position(|s| s == id)
    }

    pub fn combination_index(&self, strategies: &[usize]) -> Option<usize> {
        if strategies.len() != self.players {
            return None;
        }
        let k = self.strategy_ids.len();
        strategies
            .iter()
            .try_fold(0usize, |acc, &s| (s < k).then_some(acc * k + s))
    }

    pub fn combination(&self, mut index: usize) -> Vec<usize> {
        let k = self.strategy_ids.len();
        let mut out = vec![0; self.players];
        for slot in out.iter_mut().rev() {
            *slot = index % k;
            index /= k;
        }
        out
    }

    pub fn label(&self, strategies: &[usize]) -> String {
        strategies.iter().map(|&s| self.strategy_ids[s].as_str()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.n_combinations())
            .map(|i| self.label(&self.combination(i)))
            .collect()
    }

    /// Scores for a joint strategy given by indices. Panics on a malformed
    /// combination; use [`compute_payoff`] for checked lookup by id.
    pub fn payoff(&self, strategies: &[usize]) -> &[S] {
        let i = self
            .combination_index(strategies)
            .expect("combination matches the matrix shape");
        &self.entries[i]
    }

    pub fn entries(&self) -> &[Vec<S>] {
        &self.entries
    }

    /// Best strategy for `player` when the others play as in `profile`
    /// (`profile[player]` is ignored). Ties go to the lowest index.
    pub fn best_response(&self, player: usize, profile: &[usize]) -> usize {
        let mut joint = profile.to_vec();
        let mut best = 0;
        let mut best_score = None;
        for s in 0..self.strategy_ids.len() {
            joint[player] = s;
            let score = self.payoff(&joint)[player];
            if best_score.is_none_or(|b| self.orientation.prefers(score, b)) {
                best = s;
                best_score = Some(score);
            }
        }
        best
    }

    pub fn cast<T: Scalar>(&self) -> PayoffMatrix<T> {
        PayoffMatrix {
            strategy_ids: self.strategy_ids.clone(),
            players: self.players,
            entries: self
                .entries
                .iter()
                .map(|e| e.iter().map(|&x| T::lit(x.as_f64())).collect())
                .collect(),
            orientation: self.orientation,
        }
    }
}

/// Looks up the stored score tuple for a joint strategy given by ids.
pub fn compute_payoff<S: Scalar>(matrix: &PayoffMatrix<S>, combination: &[&str]) -> Result<Vec<S>, PayoffError> {
    if combination.len() != matrix.players() {
        return Err(PayoffError::WrongCombinationLength {
            got: combination.len(),
            players: matrix.players(),
        });
    }
    let idx = combination
        .iter()
        .map(|id| {
            matrix
                .strategy_index(id)
                .ok_or_else(|| PayoffError::UnknownStrategy(id.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(matrix.payoff(&idx).to_vec())
}

/// Mutual reward minus mutual punishment for a penalty-oriented 2×2
/// dilemma where `A` is defection and `B` cooperation. Penalties are negated
/// into payoffs, so the result is `(−BB) − (−AA)` on player 1's scores.
pub fn dilemma_strength_gap<S: Scalar>(matrix: &PayoffMatrix<S>) -> Result<S, PayoffError> {
    if matrix.players() != 2 || matrix.strategy_ids().len() != 2 || matrix.orientation() != Orientation::Penalty {
        return Err(PayoffError::NotADilemma);
    }
    let mutual_defection = matrix.payoff(&[0, 0])[0];
    let mutual_cooperation = matrix.payoff(&[1, 1])[0];
    Ok(-mutual_cooperation - -mutual_defection)
}

/// Built-in 2×2 games. Option A is defection in the dilemma variants.
pub mod presets {
    use super::{Orientation, PayoffMatrix};
    use crate::Scalar;

    pub const PD_CONVENTIONAL: &str = "pd_conventional";
    pub const PD_HARSH: &str = "pd_harsh";
    pub const PD_MILD: &str = "pd_mild";
    pub const BATTLE_OF_SEXES: &str = "battle_of_sexes";

    pub const IDS: [&str; 4] = [PD_CONVENTIONAL, PD_HARSH, PD_MILD, BATTLE_OF_SEXES];

    pub fn pd_conventional<S: Scalar>() -> PayoffMatrix<S> {
        PayoffMatrix::two_by_two([(6., 6.), (0., 10.), (10., 0.), (2., 2.)], Orientation::Penalty)
    }

    pub fn pd_harsh<S: Scalar>() -> PayoffMatrix<S> {
        PayoffMatrix::two_by_two([(8., 8.), (0., 10.), (10., 0.), (5., 5.)], Orientation::Penalty)
    }

    pub fn pd_mild<S: Scalar>() -> PayoffMatrix<S> {
        PayoffMatrix::two_by_two([(8., 8.), (0., 10.), (10., 0.), (2., 2.)], Orientation::Penalty)
    }

    pub fn battle_of_sexes<S: Scalar>() -> PayoffMatrix<S> {
        PayoffMatrix::two_by_two([(10., 7.), (0., 0.), (0., 0.), (7., 10.)], Orientation::Reward)
    }

    pub fn by_id<S: Scalar>(id: &str) -> Option<PayoffMatrix<S>> {
        match id {
            PD_CONVENTIONAL => Some(pd_conventional()),
            PD_HARSH => Some(pd_harsh()),
            PD_MILD => Some(pd_mild()),
            BATTLE_OF_SEXES => Some(battle_of_sexes()),
            _ => None,
        }
    }
}
