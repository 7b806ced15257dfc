//! Aggregates, trajectories and the four-metric scorecard.
//!
//! Final scores feed internal variability and cross-language
//! inconsistency; the ±1 action encoding feeds payoff sensitivity and
//! round variability. Games that ended in an agent failure are left out.

mod export;
mod stats;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use export::{scorecard_json, write_aggregates_csv, write_radar_csv, write_trajectories_csv};
pub use stats::{
    ci95, mean, metric_cross_language_inconsistency, metric_internal_variability, metric_payoff_sensitivity,
    metric_round_variability, population_variance, sample_std, LanguageObservation, Z95,
};

use crate::engine::{GameHistory, Termination};
use crate::payoff::presets::{PD_HARSH, PD_MILD};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("empty group {0:?}")]
    EmptyGroup(Vec<String>),
    #[error("need at least {needed} results, got {got}")]
    TooFewResults { needed: usize, got: usize },
    #[error("runs have different lengths ({expected} and {got} rounds)")]
    MixedLengths { expected: usize, got: usize },
    #[error("series lengths differ ({left} and {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("no runs")]
    NoRuns,
    #[error("a trajectory needs at least 2 rounds, got {got}")]
    TooFewRounds { got: usize },
    #[error("no models to compare")]
    NoModels,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Cumulative score per agent.
pub fn final_scores(history: &GameHistory) -> Vec<f64> {
    history.totals()
}

/// Histories that count toward analytics.
pub fn usable(histories: &[GameHistory]) -> impl Iterator<Item = &GameHistory> {
    histories.iter().filter(|h| h.termination != Termination::AgentFailure)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateCell<S> {
    pub key: Vec<String>,
    pub n: usize,
    pub mean: S,
    pub ci95: S,
}

/// Mean and 95% half-width per group, ordered by key.
pub fn aggregate<S: Scalar>(
    groups: impl IntoIterator<Item = (Vec<String>, Vec<S>)>,
) -> Result<Vec<AggregateCell<S>>, AnalyticsError> {
    let mut merged: BTreeMap<Vec<String>, Vec<S>> = BTreeMap::new();
    for (k, v) in groups {
        merged.entry(k).or_default().extend(v);
    }
    merged
        .into_iter()
        .map(|(key, values)| {
            if values.is_empty() {
                return Err(AnalyticsError::EmptyGroup(key));
            }
            Ok(AggregateCell {
                n: values.len(),
                mean: mean(&values),
                ci95: ci95(&values),
                key,
            })
        })
        .collect()
}

/// Columns available for grouping final scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupBy {
    Model,
    Language,
    Personalities,
    RoundsKnown,
    Variant,
    /// Whether the agent was told its opponent's personality.
    Disclosure,
    Agent,
}

impl GroupBy {
    pub const DEFAULT: [GroupBy; 5] = [
        GroupBy::Model,
        GroupBy::Language,
        GroupBy::Personalities,
        GroupBy::RoundsKnown,
        GroupBy::Variant,
    ];

    pub const ALL: [GroupBy; 7] = [
        GroupBy::Model,
        GroupBy::Language,
        GroupBy::Personalities,
        GroupBy::RoundsKnown,
        GroupBy::Variant,
        GroupBy::Disclosure,
        GroupBy::Agent,
    ];

    pub fn from_column(name: &str) -> Option<Self> {
        GroupBy::ALL.into_iter().find(|g| g.column() == name)
    }

    pub fn column(self) -> &'static str {
        match self {
            GroupBy::Model => "model",
            GroupBy::Language => "language",
            GroupBy::Personalities => "personalities",
            GroupBy::RoundsKnown => "rounds_known",
            GroupBy::Variant => "variant",
            GroupBy::Disclosure => "disclosure",
            GroupBy::Agent => "agent",
        }
    }

    fn value(self, h: &GameHistory, agent: usize) -> String {
        match self {
            GroupBy::Model => h.model.clone(),
            GroupBy::Language => h.setup.language.clone(),
            GroupBy::Personalities => h.setup.assignment.label(),
            GroupBy::RoundsKnown => h.rounds_known.to_string(),
            GroupBy::Variant => h.setup.variant.matrix.clone(),
            GroupBy::Disclosure => h.setup.assignment.agents[agent].disclosed().to_string(),
            GroupBy::Agent => h.setup.assignment.agents[agent].name.clone(),
        }
    }
}

/// Per-agent final scores grouped by the chosen columns.
pub fn aggregate_final_scores<S: Scalar>(
    histories: &[GameHistory],
    by: &[GroupBy],
) -> Result<Vec<AggregateCell<S>>, AnalyticsError> {
    let mut groups = Vec::new();
    for h in usable(histories) {
        for (agent, score) in final_scores(h).into_iter().enumerate() {
            let key = by.iter().map(|g| g.value(h, agent)).collect();
            groups.push((key, vec![S::lit(score)]));
        }
    }
    aggregate(groups)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    /// Per agent: first strategy → +1, anything else → −1.
    Action,
    /// Per round: moves differ → +1, moves match → −1.
    Coordination,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedRun {
    pub game: String,
    /// Set for action encoding.
    pub agent: Option<usize>,
    pub values: Vec<i8>,
}

pub fn encode_runs(histories: &[GameHistory], encoding: Encoding) -> Vec<EncodedRun> {
    let mut out = Vec::new();
    for h in histories {
        match encoding {
            Encoding::Action => {
                let first = h.strategy_ids.first().cloned().unwrap_or_default();
                for agent in 0..h.setup.assignment.agents.len() {
                    let values = h
                        .records
                        .iter()
                        .map(|r| if r.strategies[agent] == first { 1 } else { -1 })
                        .collect();
                    out.push(EncodedRun {
                        game: h.key.clone(),
                        agent: Some(agent),
                        values,
                    });
                }
            }
            Encoding::Coordination => {
                let values = h
                    .records
                    .iter()
                    .map(|r| {
                        if r.strategies.windows(2).all(|w| w[0] == w[1]) {
                            -1
                        } else {
                            1
                        }
                    })
                    .collect();
                out.push(EncodedRun {
                    game: h.key.clone(),
                    agent: None,
                    values,
                });
            }
        }
    }
    out
}

/// Per-round mean of equally long runs.
pub fn average_trajectory<S: Scalar>(runs: &[EncodedRun]) -> Result<Vec<S>, AnalyticsError> {
    let first = runs.first().ok_or(AnalyticsError::NoRuns)?;
    let len = first.values.len();
    if let Some(bad) = runs.iter().find(|r| r.values.len() != len) {
        return Err(AnalyticsError::MixedLengths {
            expected: len,
            got: bad.values.len(),
        });
    }
    let n = S::from_count(runs.len());
    Ok((0..len)
        .map(|d| {
            // integer sums keep the result independent of run order
            let total: i64 = runs.iter().map(|r| r.values[d] as i64).sum();
            S::lit(total as f64) / n
        })
        .collect())
}

/// Mean trajectory per base variant, from games that played every round.
pub fn trajectories_by_variant<S: Scalar>(
    histories: &[GameHistory],
    encoding: Encoding,
) -> Result<BTreeMap<String, Vec<S>>, AnalyticsError> {
    let mut by_variant: BTreeMap<String, Vec<GameHistory>> = BTreeMap::new();
    for h in histories
        .iter()
        .filter(|h| h.termination == Termination::CompletedAllRounds)
    {
        by_variant
            .entry(h.setup.variant.matrix.clone())
            .or_default()
            .push(h.clone());
    }
    by_variant
        .into_iter()
        .map(|(v, hs)| Ok((v, average_trajectory(&encode_runs(&hs, encoding))?)))
        .collect()
}

/// Raw or normalized metric values for one model. `sp` is absent when the
/// inputs lack either the harsh or the mild variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricValues<S> {
    pub iv: S,
    pub ci: S,
    pub sp: Option<S>,
    pub vr: S,
}

/// All four raw metrics from one model's histories.
pub fn model_metrics<S: Scalar>(histories: &[GameHistory]) -> Result<MetricValues<S>, AnalyticsError> {
    let kept: Vec<&GameHistory> = usable(histories).collect();
    let mut results = Vec::new();
    let mut observations = Vec::new();
    for h in &kept {
        let combo = h.setup.assignment.combo();
        for score in final_scores(h) {
            results.push(S::lit(score));
            observations.push(LanguageObservation {
                language: h.setup.language.clone(),
                combo: combo.clone(),
                rounds_known: h.rounds_known,
                value: S::lit(score),
            });
        }
    }
    let iv = metric_internal_variability(&results)?;
    let ci = metric_cross_language_inconsistency(&observations)?;
    let trajectories = trajectories_by_variant::<S>(histories, Encoding::Action)?;
    let sp = match (trajectories.get(PD_HARSH), trajectories.get(PD_MILD)) {
        (Some(h), Some(m)) => Some(metric_payoff_sensitivity(h, m)?),
        _ => None,
    };
    let series: Vec<Vec<S>> = trajectories.into_values().collect();
    let vr = metric_round_variability(&series)?;
    Ok(MetricValues { iv, ci, sp, vr })
}

/// Raw metrics per model, histories grouped by their `model` field.
pub fn metrics_by_model<S: Scalar>(
    histories: &[GameHistory],
) -> Result<BTreeMap<String, MetricValues<S>>, AnalyticsError> {
    let mut by_model: BTreeMap<String, Vec<GameHistory>> = BTreeMap::new();
    for h in histories {
        by_model.entry(h.model.clone()).or_default().push(h.clone());
    }
    by_model
        .into_iter()
        .map(|(m, hs)| Ok((m, model_metrics(&hs)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelScore<S> {
    pub raw: MetricValues<S>,
    pub normalized: MetricValues<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scorecard<S> {
    pub models: BTreeMap<String, ModelScore<S>>,
}

fn normalize<S: Scalar>(x: S, max: S) -> S {
    if max > S::zero() {
        x / max
    } else {
        S::zero()
    }
}

/// Divides each metric by its maximum over the given models.
pub fn build_scorecard<S: Scalar>(raw: &BTreeMap<String, MetricValues<S>>) -> Result<Scorecard<S>, AnalyticsError> {
    if raw.is_empty() {
        return Err(AnalyticsError::NoModels);
    }
    let max_of = |f: &dyn Fn(&MetricValues<S>) -> Option<S>| {
        raw.values()
            .filter_map(f)
            .fold(S::zero(), |m, x| if x > m { x } else { m })
    };
    let (iv, ci, sp, vr) = (
        max_of(&|m| Some(m.iv)),
        max_of(&|m| Some(m.ci)),
        max_of(&|m| m.sp),
        max_of(&|m| Some(m.vr)),
    );
    let models = raw
        .iter()
        .map(|(name, m)| {
            let normalized = MetricValues {
                iv: normalize(m.iv, iv),
                ci: normalize(m.ci, ci),
                sp: m.sp.map(|x| normalize(x, sp)),
                vr: normalize(m.vr, vr),
            };
            (name.clone(), ModelScore { raw: *m, normalized })
        })
        .collect();
    Ok(Scorecard { models })
}

#[cfg(test)]
mod tests;
