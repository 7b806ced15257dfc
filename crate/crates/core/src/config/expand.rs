use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::GameConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSlot {
    pub name: String,
    pub personality: String,
    /// Probability that this agent is told its opponent's personality.
    pub opponent_prob: f64,
}

impl AgentSlot {
    pub fn disclosed(&self) -> bool {
        self.opponent_prob > 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentAssignment {
    pub agents: Vec<AgentSlot>,
}

impl AgentAssignment {
    pub fn personalities(&self) -> Vec<&str> {
        self.agents.iter().map(|a| a.personality.as_str()).collect()
    }

    /// `cooperative/selfish`
    pub fn label(&self) -> String {
        self.personalities().join("/")
    }

    /// Order-free label of the personality multiset, e.g. `cooperative+selfish`.
    pub fn combo(&self) -> String {
        let mut ids = self.personalities();
        ids.sort_unstable();
        ids.join("+")
    }
}

/// Expands the configured agents into concrete personality assignments.
///
/// With `all_agent_permutations`, every personality is tried for every
/// agent. When `dedupe` is set, assignments that differ only by order
/// collapse to the lexicographically smallest representative. Otherwise the
/// single literal assignment is returned.
pub fn expand_agent_permutations(config: &GameConfig, dedupe: bool) -> Vec<AgentAssignment> {
    let names = &config.agents.names;
    let probs = &config.agents.opponent_personality_prob;
    let slot = |i: usize, personality: &str| AgentSlot {
        name: names[i].clone(),
        personality: personality.to_string(),
        opponent_prob: probs.get(i).copied().unwrap_or(0.0),
    };

    if !config.all_agent_permutations {
        let literal = config
            .agents
            .assignment
            .clone()
            .unwrap_or_else(|| config.personality_ids());
        return vec![AgentAssignment {
            agents: literal
                .iter()
                .take(names.len())
                .enumerate()
                .map(|(i, p)| slot(i, p))
                .collect(),
        }];
    }

    let mut ids = config.personality_ids();
    ids.sort();
    if ids.is_empty() || names.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; names.len()];
    loop {
        let keep = !dedupe || idx.windows(2).all(|w| w[0] <= w[1]);
        if keep {
            out.push(AgentAssignment {
                agents: idx.iter().enumerate().map(|(i, &k)| slot(i, &ids[k])).collect(),
            });
        }
        // odometer, last agent fastest
        let mut pos = names.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < ids.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// A payoff variant plus an optional override of whether the round count
/// is disclosed. Written `pd_harsh`, `pd_harsh:known` or `pd_harsh:unknown`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Variant {
    pub matrix: String,
    pub rounds_known: Option<bool>,
}

#[derive(Debug, Error, PartialEq)]
#[error("invalid variant `{0}`: expected <matrix>[:known|:unknown]")]
pub struct VariantParseError(pub String);

impl Variant {
    pub fn new(matrix: impl Into<String>) -> Self {
        Variant {
            matrix: matrix.into(),
            rounds_known: None,
        }
    }

    pub fn with_rounds_known(mut self, known: bool) -> Self {
        self.rounds_known = Some(known);
        self
    }

    pub fn id(&self) -> String {
        self.to_string()
    }

    pub fn resolve_rounds_known(&self, config_default: bool) -> bool {
        self.rounds_known.unwrap_or(config_default)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rounds_known {
            None => f.write_str(&self.matrix),
            Some(true) => write!(f, "{}:known", self.matrix),
            Some(false) => write!(f, "{}:unknown", self.matrix),
        }
    }
}

impl FromStr for Variant {
    type Err = VariantParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (matrix, known) = match s.split_once(':') {
            None => (s, None),
            Some((m, "known")) => (m, Some(true)),
            Some((m, "unknown")) => (m, Some(false)),
            Some(_) => return Err(VariantParseError(s.to_string())),
        };
        if matrix.is_empty() || matrix.contains(['|', ',']) {
            return Err(VariantParseError(s.to_string()));
        }
        Ok(Variant {
            matrix: matrix.to_string(),
            rounds_known: known,
        })
    }
}

impl Serialize for Variant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSetup {
    pub assignment: AgentAssignment,
    pub language: String,
    pub variant: Variant,
    pub repetition: u32,
}

impl GameSetup {
    /// Stable identity used for seeding and resume, e.g.
    /// `cooperative/selfish|en|pd_harsh:unknown|3`.
    pub fn key(&self) -> String {
        format!(
            "{}|{}|{}|{}",
            self.assignment.label(),
            self.language,
            self.variant,
            self.repetition
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EnumerateError {
    #[error("no variants given")]
    EmptyVariants,
    #[error("repetitions must be at least 1")]
    ZeroRepetitions,
}

/// Every (assignment, language, variant, repetition) tuple, assignment-major.
pub fn enumerate_game_setups(
    config: &GameConfig,
    assignments: &[AgentAssignment],
    variants: &[Variant],
    repetitions: u32,
) -> Result<Vec<GameSetup>, EnumerateError> {
    if variants.is_empty() {
        return Err(EnumerateError::EmptyVariants);
    }
    if repetitions == 0 {
        return Err(EnumerateError::ZeroRepetitions);
    }
    let mut out =
        Vec::with_capacity(assignments.len() * config.languages.len() * variants.len() * repetitions as usize);
    for assignment in assignments {
        for language in &config.languages {
            for variant in variants {
                for repetition in 0..repetitions {
                    out.push(GameSetup {
                        assignment: assignment.clone(),
                        language: language.clone(),
                        variant: variant.clone(),
                        repetition,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::fixtures::pd_config;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn with_personalities(n: usize) -> GameConfig {
        let mut c = pd_config();
        for map in c.agents.personalities.values_mut() {
            *map = (0..n).map(|i| (format!("p{i}"), format!("text {i}"))).collect();
        }
        c
    }

    fn pd_variants() -> Vec<Variant> {
        let mut v = Vec::new();
        for m in ["pd_conventional", "pd_harsh", "pd_mild"] {
            for known in [true, false] {
                v.push(Variant::new(m).with_rounds_known(known));
            }
        }
        v
    }

    #[test]
    fn two_personalities_dedupe_to_three() {
        let c = pd_config();
        let a = expand_agent_permutations(&c, true);
        let labels: Vec<String> = a.iter().map(AgentAssignment::label).collect();
        assert_eq!(
            labels,
            vec!["cooperative/cooperative", "cooperative/selfish", "selfish/selfish"]
        );
    }

    #[test]
    fn two_personalities_without_dedupe_give_four() {
        let a = expand_agent_permutations(&pd_config(), false);
        assert_eq!(a.len(), 4);
        assert_eq!(a[2].label(), "selfish/cooperative");
    }

    #[test]
    fn literal_assignment_passes_through() {
        let mut c = pd_config();
        c.all_agent_permutations = false;
        let a = expand_agent_permutations(&c, true);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].label(), "cooperative/selfish");
        c.agents.assignment = Some(vec!["selfish".into(), "selfish".into()]);
        assert_eq!(expand_agent_permutations(&c, true)[0].label(), "selfish/selfish");
    }

    #[test]
    fn disclosure_follows_probability() {
        let mut c = pd_config();
        c.agents.opponent_personality_prob = vec![0.0, 0.5];
        let a = &expand_agent_permutations(&c, true)[0];
        assert!(!a.agents[0].disclosed());
        assert!(a.agents[1].disclosed());
    }

    #[test]
    fn eighteen_shapes() {
        let c = pd_config();
        let assignments = expand_agent_permutations(&c, true);
        let mut single = c.clone();
        single.languages.truncate(1);
        let setups = enumerate_game_setups(&single, &assignments, &pd_variants(), 1).unwrap();
        assert_eq!(setups.len(), 18);
        let keys: HashSet<String> = setups.iter().map(GameSetup::key).collect();
        assert_eq!(keys.len(), 18);
    }

    #[test]
    fn campaign_decision_count() {
        let mut c = pd_config();
        c.languages = ["en", "fr", "ar", "zh", "vi"].map(String::from).to_vec();
        let assignments = expand_agent_permutations(&c, true);
        let setups = enumerate_game_setups(&c, &assignments, &pd_variants(), 10).unwrap();
        let models = 4;
        let decisions = models * setups.len() * c.n_rounds as usize * c.player_count();
        assert_eq!(setups.len(), 900);
        assert_eq!(decisions, 72_000);
    }

    #[test]
    fn unit_campaign() {
        let mut c = pd_config();
        c.languages.truncate(1);
        c.all_agent_permutations = false;
        let a = expand_agent_permutations(&c, true);
        let setups = enumerate_game_setups(&c, &a, &[Variant::new("default")], 1).unwrap();
        assert_eq!(setups.len(), 1);
        assert_eq!(setups[0].key(), "cooperative/selfish|en|default|0");
    }

    #[test]
    fn ordering_is_assignment_major() {
        let c = pd_config();
        let a = expand_agent_permutations(&c, true);
        let v = [Variant::new("x"), Variant::new("y")];
        let setups = enumerate_game_setups(&c, &a, &v, 2).unwrap();
        let first: Vec<String> = setups.iter().take(5).map(GameSetup::key).collect();
        assert_eq!(
            first,
            vec![
                "cooperative/cooperative|en|x|0",
                "cooperative/cooperative|en|x|1",
                "cooperative/cooperative|en|y|0",
                "cooperative/cooperative|en|y|1",
                "cooperative/cooperative|fr|x|0",
            ]
        );
    }

    #[test]
    fn enumerate_rejects_degenerate_inputs() {
        let c = pd_config();
        let a = expand_agent_permutations(&c, true);
        assert_eq!(
            enumerate_game_setups(&c, &a, &[], 1),
            Err(EnumerateError::EmptyVariants)
        );
        assert_eq!(
            enumerate_game_setups(&c, &a, &[Variant::new("x")], 0),
            Err(EnumerateError::ZeroRepetitions)
        );
    }

    #[test]
    fn variant_grammar() {
        assert_eq!("pd_harsh".parse::<Variant>().unwrap(), Variant::new("pd_harsh"));
        let v: Variant = "pd_mild:unknown".parse().unwrap();
        assert_eq!(v.rounds_known, Some(false));
        assert_eq!(v.to_string(), "pd_mild:unknown");
        assert!("pd_mild:maybe".parse::<Variant>().is_err());
        assert!(":known".parse::<Variant>().is_err());
        assert_eq!(serde_json::to_string(&v).unwrap(), "\"pd_mild:unknown\"");
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    proptest! {
        #[test]
        fn assignment_counts(p in 1usize..7) {
            let c = with_personalities(p);
            prop_assert_eq!(expand_agent_permutations(&c, true).len(), binomial(p + 1, 2));
            prop_assert_eq!(expand_agent_permutations(&c, false).len(), p * p);
        }

        #[test]
        fn dedupe_keeps_one_per_multiset(p in 1usize..6) {
            let c = with_personalities(p);
            let full = expand_agent_permutations(&c, false);
            let multisets: HashSet<String> = full.iter().map(AgentAssignment::combo).collect();
            let deduped = expand_agent_permutations(&c, true);
            prop_assert_eq!(deduped.len(), multisets.len());
            for a in &deduped {
                let ps = a.personalities();
                let mut sorted = ps.clone();
                sorted.sort_unstable();
                prop_assert_eq!(ps, sorted);
            }
        }

        #[test]
        fn setup_count_is_product(p in 1usize..5, langs in 1usize..4, vars in 1usize..5, reps in 1u32..6, dedupe in any::<bool>()) {
            let mut c = with_personalities(p);
            c.languages = (0..langs).map(|i| format!("l{i}")).collect();
            let a = expand_agent_permutations(&c, dedupe);
            let v: Vec<Variant> = (0..vars).map(|i| Variant::new(format!("v{i}"))).collect();
            let setups = enumerate_game_setups(&c, &a, &v, reps).unwrap();
            prop_assert_eq!(setups.len(), a.len() * langs * vars * reps as usize);
            let keys: HashSet<String> = setups.iter().map(GameSetup::key).collect();
            prop_assert_eq!(keys.len(), setups.len());
        }
    }
}
