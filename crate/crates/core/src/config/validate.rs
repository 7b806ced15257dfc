use std::collections::HashSet;

use super::GameConfig;
use crate::validation::{FindingCode as Code, ValidationReport};

/// Above this many joint combinations the matrix checks are skipped.
const MAX_COMBINATIONS: usize = 1 << 16;

/// Checks every structural invariant of a parsed config. Never panics;
/// each violation becomes one finding.
pub fn validate_config(config: &GameConfig) -> ValidationReport {
    let mut r = ValidationReport::default();

    if config.n_rounds < 1 {
        r.push(Code::NRoundsZero, "nRounds", "n_rounds ≥ 1 violated");
    }

    if config.languages.is_empty() {
        r.push(Code::NoLanguages, "languages", "at least one language is required");
    }
    let mut seen = HashSet::new();
    for lang in &config.languages {
        if !seen.insert(lang) {
            r.push(
                Code::DuplicateLanguage,
                "languages",
                format!("`{lang}` is listed twice"),
            );
        }
    }

    check_agents(config, &mut r);
    check_payoffs(config, &mut r);
    r
}

fn check_agents(config: &GameConfig, r: &mut ValidationReport) {
    let agents = &config.agents;
    if agents.names.len() < 2 {
        r.push(
            Code::TooFewAgents,
            "agents.names",
            format!("{} agent(s); at least 2 required", agents.names.len()),
        );
    }
    let mut seen = HashSet::new();
    for name in &agents.names {
        if !seen.insert(name) {
            r.push(
                Code::DuplicateAgentName,
                "agents.names",
                format!("`{name}` is listed twice"),
            );
        }
    }

    let reference = config.personality_ids();
    if reference.is_empty() {
        r.push(
            Code::NoPersonalities,
            "agents.personalities",
            "no personality ids defined",
        );
    }
    let reference_set: HashSet<&String> = reference.iter().collect();
    for lang in &config.languages {
        match agents.personalities.get(lang) {
            None => r.push(
                Code::MissingLanguagePersonalities,
                format!("agents.personalities.{lang}"),
                format!("no personalities for language `{lang}`"),
            ),
            Some(map) => {
                let ids: HashSet<&String> = map.keys().collect();
                if ids != reference_set {
                    r.push(
                        Code::PersonalitySetMismatch,
                        format!("agents.personalities.{lang}"),
                        "personality ids differ from the first language's set",
                    );
                }
            }
        }
    }

    if agents.opponent_personality_prob.len() != agents.names.len() {
        r.push(
            Code::ProbabilityCountMismatch,
            "agents.opponentPersonalityProb",
            format!(
                "{} probabilities for {} agents",
                agents.opponent_personality_prob.len(),
                agents.names.len()
            ),
        );
    }
    for (i, &q) in agents.opponent_personality_prob.iter().enumerate() {
        if !(0.0..=1.0).contains(&q) {
            r.push(
                Code::ProbabilityOutOfRange,
                format!("agents.opponentPersonalityProb[{i}]"),
                format!("{q} is outside [0, 1]"),
            );
        }
    }

    let literal = match &agents.assignment {
        Some(a) => Some(("agents.x-assignment", a.clone())),
        None if !config.all_agent_permutations => Some(("agents.personalities", reference.clone())),
        None => None,
    };
    if let Some((path, ids)) = literal {
        if ids.len() != agents.names.len() {
            r.push(
                Code::AssignmentLengthMismatch,
                path,
                format!("{} personalities listed for {} agents", ids.len(), agents.names.len()),
            );
        }
        for id in ids.iter().filter(|id| !reference_set.contains(id)) {
            r.push(Code::UnknownPersonality, path, format!("unknown personality id `{id}`"));
        }
    }
}

fn check_payoffs(config: &GameConfig, r: &mut ValidationReport) {
    let spec = &config.payoff_matrix;
    let ids = spec.strategy_ids();
    let id_set: HashSet<&String> = ids.iter().collect();
    if ids.len() < 2 {
        r.push(
            Code::TooFewStrategies,
            "payoffMatrix.strategies",
            "at least 2 strategies are required",
        );
    }
    for lang in &config.languages {
        match spec.strategies.get(lang) {
            None => r.push(
                Code::MissingLanguageStrategies,
                format!("payoffMatrix.strategies.{lang}"),
                format!("no strategy labels for language `{lang}`"),
            ),
            Some(map) => {
                if map.keys().collect::<HashSet<_>>() != id_set {
                    r.push(
                        Code::StrategySetMismatch,
                        format!("payoffMatrix.strategies.{lang}"),
                        "strategy ids differ from the first language's set",
                    );
                }
            }
        }
    }

    for (id, w) in &spec.weights {
        if !w.is_finite() {
            r.push(
                Code::NonFiniteWeight,
                format!("payoffMatrix.weights.{id}"),
                "weight is not finite",
            );
        }
    }

    let players = config.player_count();
    let listed: HashSet<&String> = spec.combinations.iter().collect();
    let mut seen = HashSet::new();
    for label in &spec.combinations {
        if !seen.insert(label) {
            r.push(
                Code::DuplicateCombination,
                "payoffMatrix.combinations",
                format!("`{label}` is listed twice"),
            );
        }
    }

    let product_size = ids.len().checked_pow(players as u32).filter(|&n| n <= MAX_COMBINATIONS);
    match product_size {
        None => r.push(
            Code::UnexpectedCombination,
            "payoffMatrix.combinations",
            "strategy space too large to check",
        ),
        Some(_) if ids.is_empty() || players == 0 => {}
        Some(_) => {
            let product = product_labels(&ids, players);
            let mut distinct = HashSet::new();
            for label in &product {
                if !distinct.insert(label) {
                    r.push(
                        Code::AmbiguousCombinationLabel,
                        "payoffMatrix.strategies",
                        format!("label `{label}` denotes more than one joint strategy"),
                    );
                }
            }
            for label in product.iter().filter(|l| !listed.contains(l)) {
                r.push(
                    Code::MissingCombination,
                    "payoffMatrix.combinations",
                    format!("`{label}` is missing"),
                );
            }
            for label in spec.combinations.iter().filter(|l| !distinct.contains(l)) {
                r.push(
                    Code::UnexpectedCombination,
                    "payoffMatrix.combinations",
                    format!("`{label}` is not a joint strategy"),
                );
            }
        }
    }

    for label in &spec.combinations {
        if !spec.matrix.contains_key(label) {
            r.push(
                Code::MissingMatrixEntry,
                format!("payoffMatrix.matrix.{label}"),
                "no weights for this combination",
            );
        }
    }
    for (label, tuple) in &spec.matrix {
        let path = format!("payoffMatrix.matrix.{label}");
        if !listed.contains(label) {
            r.push(
                Code::UnexpectedCombination,
                &path,
                format!("`{label}` is not a listed combination"),
            );
        }
        if tuple.len() != players {
            r.push(
                Code::MatrixArity,
                &path,
                format!("{} weights for {players} players", tuple.len()),
            );
        }
        for w in tuple.iter().filter(|w| !spec.weights.contains_key(*w)) {
            r.push(Code::UnknownWeight, &path, format!("weight `{w}` is not defined"));
        }
    }

    for (i, label) in config.stop_game_when.iter().enumerate() {
        if !listed.contains(label) {
            r.push(
                Code::UnknownCombination,
                format!("stopGameWhen[{i}]"),
                format!("`{label}` is not in payoffMatrix.combinations"),
            );
        }
    }
}

/// Labels of every joint strategy in mixed-radix order.
pub(crate) fn product_labels(ids: &[String], players: usize) -> Vec<String> {
    let mut labels = vec![String::new()];
    for _ in 0..players {
        labels = labels
            .iter()
            .flat_map(|prefix| ids.iter().map(move |id| format!("{prefix}{id}")))
            .collect();
    }
    labels
}
