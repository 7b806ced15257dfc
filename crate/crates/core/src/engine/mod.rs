//! Game instantiation and the round loop.
//!
//! Every agent's prompt for a round is rendered from the same snapshot of
//! the history, so no agent can see another's move of the current round.

mod history;

use std::sync::Arc;

use thiserror::Error;

pub use history::{FailureInfo, GameHistory, RoundRecord, Termination};

use crate::agent::{
    compose_message, decide, AgentFactory, AgentHandle, AgentSpec, DecisionError, DecisionRequest, FactoryError,
    HistoryView, DEFAULT_RETRY_BUDGET,
};
use crate::config::{GameConfig, GameSetup};
use crate::payoff::{presets, PayoffError, PayoffMatrix};
use crate::seed::{agent_seed, digest_hex, game_seed};
use crate::template::{render_prompt, PastRound, PayoffLine, PromptTemplate, RenderError, RoundContext, TemplateSet};

/// Players supported by the round loop and the prompt wording.
pub const SUPPORTED_PLAYERS: usize = 2;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("setup {setup}: {source}")]
    Factory { setup: String, source: FactoryError },
    #[error("no template for language `{0}`")]
    MissingTemplate(String),
    #[error("no strategy labels for language `{0}`")]
    MissingLabels(String),
    #[error("unknown payoff variant `{0}`")]
    UnknownVariant(String),
    #[error("preset `{variant}` needs strategy ids A and B and two players")]
    PresetShape { variant: String },
    #[error("only {SUPPORTED_PLAYERS}-player games are supported, config has {0}")]
    UnsupportedPlayerCount(usize),
    #[error("payoff matrix: {0}")]
    Matrix(#[from] PayoffError),
}

/// The payoff matrix a variant id names: a built-in preset, or the
/// config's own matrix under its `x-variantId`.
pub fn resolve_matrix(config: &GameConfig, matrix_id: &str) -> Result<PayoffMatrix<f64>, EngineError> {
    if matrix_id == config.variant_id {
        return config_matrix(config);
    }
    let preset = presets::by_id::<f64>(matrix_id).ok_or_else(|| EngineError::UnknownVariant(matrix_id.into()))?;
    if config.payoff_matrix.strategy_ids() != preset.strategy_ids() || config.player_count() != preset.players() {
        return Err(EngineError::PresetShape {
            variant: matrix_id.into(),
        });
    }
    Ok(preset)
}

/// Builds the matrix declared in the config. Assumes a validated config.
pub fn config_matrix(config: &GameConfig) -> Result<PayoffMatrix<f64>, EngineError> {
    let spec = &config.payoff_matrix;
    let ids = spec.strategy_ids();
    let players = config.player_count();
    let k = ids.len();
    let total = k.checked_pow(players as u32).ok_or(PayoffError::TooSmall)?;
    let mut entries = Vec::with_capacity(total);
    for index in 0..total {
        let mut rest = index;
        let mut label = vec![String::new(); players];
        for slot in label.iter_mut().rev() {
            *slot = ids[rest % k].clone();
            rest /= k;
        }
        let label = label.concat();
        let weights = spec.matrix.get(&label).ok_or(PayoffError::WrongCombinationCount {
            expected: total,
            got: index,
        })?;
        entries.push(
            weights
                .iter()
                .map(|w| spec.weights.get(w).copied().unwrap_or(f64::NAN))
                .collect(),
        );
    }
    Ok(PayoffMatrix::new(ids, players, entries, spec.orientation)?)
}

/// One game ready to play: agents, matrix, template and its history.
#[derive(Debug)]
pub struct GameInstance {
    pub setup: GameSetup,
    pub seed: u64,
    pub model: String,
    pub game_name: String,
    pub n_rounds: u32,
    pub rounds_known: bool,
    pub matrix: Arc<PayoffMatrix<f64>>,
    /// Localized labels, parallel to the matrix strategy ids.
    pub labels: Vec<String>,
    pub agents: Vec<AgentHandle>,
    pub personality_texts: Vec<String>,
    pub opponent_probs: Vec<f64>,
    pub template: PromptTemplate,
    pub stop_game_when: Vec<String>,
    pub agents_communicate: bool,
    pub retry_budget: u32,
    history: Vec<RoundRecord>,
}

/// One instance per setup, in setup order. Seeds derive from
/// `campaign_seed` and each setup key.
pub fn instantiate_games(
    config: &GameConfig,
    templates: &TemplateSet,
    setups: &[GameSetup],
    factory: &dyn AgentFactory,
    campaign_seed: u64,
) -> Result<Vec<GameInstance>, EngineError> {
    setups
        .iter()
        .map(|s| instantiate_game(config, templates, s, factory, campaign_seed))
        .collect()
}

pub fn instantiate_game(
    config: &GameConfig,
    templates: &TemplateSet,
    setup: &GameSetup,
    factory: &dyn AgentFactory,
    campaign_seed: u64,
) -> Result<GameInstance, EngineError> {
    let players = config.player_count();
    if players != SUPPORTED_PLAYERS || setup.assignment.agents.len() != players {
        return Err(EngineError::UnsupportedPlayerCount(
            players.max(setup.assignment.agents.len()),
        ));
    }
    let lang = &setup.language;
    let template = templates
        .get(lang)
        .ok_or_else(|| EngineError::MissingTemplate(lang.clone()))?
        .clone();
    let labels = config
        .payoff_matrix
        .labels(lang)
        .ok_or_else(|| EngineError::MissingLabels(lang.clone()))?;
    let matrix = resolve_matrix(config, &setup.variant.matrix)?;
    let key = setup.key();
    let seed = game_seed(campaign_seed, &key);

    let mut agents = Vec::with_capacity(players);
    for (index, slot) in setup.assignment.agents.iter().enumerate() {
        let spec = AgentSpec {
            index,
            name: slot.name.clone(),
            personality: slot.personality.clone(),
            language: lang.clone(),
            seed: agent_seed(seed, index),
        };
        agents.push(factory.build(&spec).map_err(|source| EngineError::Factory {
            setup: key.clone(),
            source,
        })?);
    }

    Ok(GameInstance {
        seed,
        model: config.llm.clone(),
        game_name: config.name.clone(),
        n_rounds: config.n_rounds,
        rounds_known: setup.variant.resolve_rounds_known(config.n_rounds_is_known),
        labels,
        personality_texts: setup
            .assignment
            .agents
            .iter()
            .map(|a| config.personality_text(lang, &a.personality))
            .collect(),
        opponent_probs: setup.assignment.agents.iter().map(|a| a.opponent_prob).collect(),
        agents,
        matrix: Arc::new(matrix),
        template,
        stop_game_when: config.stop_game_when.clone(),
        agents_communicate: config.agents_communicate,
        retry_budget: DEFAULT_RETRY_BUDGET,
        history: Vec::new(),
        setup: setup.clone(),
    })
}

/// Why a round produced no record.
#[derive(Debug, Error)]
pub enum RoundError {
    #[error("game already finished")]
    Finished,
    #[error("agent {agent}: {source}")]
    Agent { agent: String, source: DecisionError },
    #[error(transparent)]
    Render(#[from] RenderError),
}

impl GameInstance {
    pub fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    fn opponent(i: usize) -> usize {
        1 - i
    }

    fn context(&self, i: usize, incoming: Option<String>) -> RoundContext {
        let o = Self::opponent(i);
        let k = self.matrix.strategy_ids().len();
        let mut payoffs = Vec::with_capacity(k * k);
        for mine in 0..k {
            for theirs in 0..k {
                let mut joint = [0usize; 2];
                joint[i] = mine;
                joint[o] = theirs;
                let s = self.matrix.payoff(&joint);
                payoffs.push(PayoffLine {
                    mine: self.labels[mine].clone(),
                    theirs: self.labels[theirs].clone(),
                    you: s[i],
                    them: s[o],
                });
            }
        }
        let label_of = |id: &str| {
            self.matrix
                .strategy_index(id)
                .map(|x| self.labels[x].clone())
                .unwrap_or_default()
        };
        let history = self
            .history
            .iter()
            .map(|r| PastRound {
                round: r.round,
                mine: label_of(&r.strategies[i]),
                theirs: label_of(&r.strategies[o]),
                you: r.scores[i],
                them: r.scores[o],
            })
            .collect();
        RoundContext {
            game_name: self.game_name.clone(),
            n_rounds: self.n_rounds,
            current_round: self.history.len() as u32 + 1,
            n_rounds_is_known: self.rounds_known,
            personality_text: self.personality_texts[i].clone(),
            opponent_personality_text: self.personality_texts[o].clone(),
            opponent_prob: self.opponent_probs[i],
            strategies: self.labels.clone(),
            orientation: self.matrix.orientation(),
            payoffs,
            history,
            incoming_message: incoming,
        }
    }

    fn view(&self, i: usize) -> HistoryView {
        let o = Self::opponent(i);
        HistoryView {
            own: self.history.iter().map(|r| r.strategies[i].clone()).collect(),
            opponent: self.history.iter().map(|r| r.strategies[o].clone()).collect(),
        }
    }

    /// Prompts each agent would receive for the next round.
    pub fn decision_prompts(&self, messages: Option<&[String]>) -> Result<Vec<String>, RenderError> {
        (0..self.agents.len())
            .map(|i| {
                let incoming = messages.map(|m| m[Self::opponent(i)].clone());
                render_prompt(&self.template, &self.context(i, incoming))
            })
            .collect()
    }

    /// Plays the next round and appends its record.
    pub fn play_round(&mut self) -> Result<&RoundRecord, RoundError> {
        let round = self.history.len() as u32 + 1;
        if round > self.n_rounds {
            return Err(RoundError::Finished);
        }
        let book = &self.template.phrases;

        let messages = if self.agents_communicate {
            let mut out = Vec::with_capacity(self.agents.len());
            for (i, agent) in self.agents.iter().enumerate() {
                let prompt = render_prompt(&self.template, &self.context(i, None))?;
                let prompt = format!("{}\n\n{}", prompt.trim_end(), book.raw("message_instruction"));
                let msg = compose_message(agent, &prompt).map_err(|source| RoundError::Agent {
                    agent: agent.name.clone(),
                    source,
                })?;
                out.push(msg);
            }
            Some(out)
        } else {
            None
        };

        // all prompts come from the pre-round snapshot
        let prompts = self.decision_prompts(messages.as_deref())?;
        let label_list = book.join(&self.labels);
        let views: Vec<HistoryView> = (0..self.agents.len()).map(|i| self.view(i)).collect();

        let mut strategies = Vec::with_capacity(self.agents.len());
        let mut replies = Vec::with_capacity(self.agents.len());
        for (i, agent) in self.agents.iter().enumerate() {
            let request = DecisionRequest {
                prompt: prompts[i].clone(),
                strategy_ids: self.matrix.strategy_ids().to_vec(),
                labels: self.labels.clone(),
                answer_instruction: book.fill("answer_instruction", &[("labels", &label_list)]),
                retry_notice: book.fill("retry_notice", &[("labels", &label_list)]),
                retry_budget: self.retry_budget,
                game: Some((Arc::clone(&self.matrix), i)),
            };
            let d = decide(agent, &request, &views[i], round).map_err(|source| RoundError::Agent {
                agent: agent.name.clone(),
                source,
            })?;
            strategies.push(d.strategy);
            replies.push(d.replies);
        }

        let idx: Vec<usize> = strategies
            .iter()
            .map(|s| {
                self.matrix
                    .strategy_index(s)
                    .expect("decisions come from the valid set")
            })
            .collect();
        let scores = self.matrix.payoff(&idx).to_vec();
        let reply_digests = if replies.iter().all(Vec::is_empty) {
            Vec::new()
        } else {
            replies.iter().map(|r| r.iter().map(digest_hex).collect()).collect()
        };
        self.history.push(RoundRecord {
            round,
            strategies,
            scores,
            messages,
            reply_digests,
            replies,
        });
        Ok(self.history.last().expect("just pushed"))
    }
}

/// Runs the next round of `game`.
pub fn run_round(game: &mut GameInstance) -> Result<&RoundRecord, RoundError> {
    game.play_round()
}

/// True iff the latest record's combination is a stop combination.
pub fn check_stop_condition(records: &[RoundRecord], stop_game_when: &[String]) -> bool {
    records
        .last()
        .is_some_and(|r| stop_game_when.contains(&r.combination()))
}

/// Plays until the last round, a stop combination, or an agent failure.
pub fn run_game(mut game: GameInstance) -> GameHistory {
    let mut termination = Termination::CompletedAllRounds;
    let mut failure = None;
    while (game.history.len() as u32) < game.n_rounds {
        let round = game.history.len() as u32 + 1;
        if let Err(e) = game.play_round() {
            let agent = match &e {
                RoundError::Agent { agent, .. } => Some(agent.clone()),
                _ => None,
            };
            failure = Some(FailureInfo {
                round,
                agent,
                reason: e.to_string(),
            });
            termination = Termination::AgentFailure;
            break;
        }
        if check_stop_condition(&game.history, &game.stop_game_when) {
            termination = Termination::StopCondition;
            break;
        }
    }
    GameHistory {
        key: game.setup.key(),
        model: game.model,
        game_name: game.game_name,
        n_rounds: game.n_rounds,
        rounds_known: game.rounds_known,
        strategy_ids: game.matrix.strategy_ids().to_vec(),
        orientation: game.matrix.orientation(),
        matrix: game.matrix.entries().to_vec(),
        setup: game.setup,
        records: game.history,
        termination,
        failure,
    }
}
