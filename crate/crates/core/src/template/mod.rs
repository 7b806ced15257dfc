//! Per-language prompt templates with a fixed set of `{name}` placeholders.
//!
//! `{{` and `}}` produce literal braces. Leading lines of the form
//! `%% key = value` override phrases from the built-in [`Phrasebook`].

mod phrasebook;
mod render;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use thiserror::Error;

use crate::config::{GameConfig, NO_PERSONALITY};
use crate::validation::{FindingCode, ValidationReport};

pub use phrasebook::{has_builtin, Phrasebook};
pub use render::{render_prompt, PastRound, PayoffLine, RenderError, RoundContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Placeholder {
    GameName,
    NRounds,
    CurrentRound,
    RoundInfo,
    Personality,
    OpponentPersonality,
    Strategies,
    PayoffDescription,
    History,
    IncomingMessage,
}

impl Placeholder {
    pub const ALL: [Placeholder; 10] = [
        Placeholder::GameName,
        Placeholder::NRounds,
        Placeholder::CurrentRound,
        Placeholder::RoundInfo,
        Placeholder::Personality,
        Placeholder::OpponentPersonality,
        Placeholder::Strategies,
        Placeholder::PayoffDescription,
        Placeholder::History,
        Placeholder::IncomingMessage,
    ];

    pub const REQUIRED: [Placeholder; 3] = [
        Placeholder::Strategies,
        Placeholder::PayoffDescription,
        Placeholder::RoundInfo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Placeholder::GameName => "game_name",
            Placeholder::NRounds => "n_rounds",
            Placeholder::CurrentRound => "current_round",
            Placeholder::RoundInfo => "round_info",
            Placeholder::Personality => "personality",
            Placeholder::OpponentPersonality => "opponent_personality",
            Placeholder::Strategies => "strategies",
            Placeholder::PayoffDescription => "payoff_description",
            Placeholder::History => "history",
            Placeholder::IncomingMessage => "incoming_message",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Segment {
    Text(String),
    Slot(Placeholder),
}

/// One source line. Lines holding a placeholder are dropped from the
/// output when they render to whitespace only.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Line {
    pub segments: Vec<Segment>,
    pub newline: bool,
}

impl Line {
    fn has_slot(&self) -> bool {
        self.segments.iter().any(|s| matches!(s, Segment::Slot(_)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PromptTemplate {
    pub language: String,
    pub body: String,
    pub phrases: Phrasebook,
    pub(crate) lines: Vec<Line>,
}

impl PromptTemplate {
    pub fn placeholders(&self) -> Vec<Placeholder> {
        let mut out: Vec<Placeholder> = self
            .lines
            .iter()
            .flat_map(|l| &l.segments)
            .filter_map(|s| match s {
                Segment::Slot(p) => Some(*p),
                Segment::Text(_) => None,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn uses(&self, p: Placeholder) -> bool {
        self.placeholders().contains(&p)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TemplateError {
    #[error("[{language}] unknown placeholder `{{{name}}}` at offset {offset}")]
    UnknownPlaceholder {
        language: String,
        name: String,
        offset: usize,
    },
    #[error("[{language}] unclosed `{{` at offset {offset}")]
    Unclosed { language: String, offset: usize },
    #[error("[{language}] unmatched `}}` at offset {offset}")]
    Unmatched { language: String, offset: usize },
    #[error("[{language}] required placeholder `{{{name}}}` is missing")]
    MissingRequired { language: String, name: String },
    #[error("no template for language `{language}`")]
    MissingLanguage { language: String },
    #[error("malformed phrase override on line {line}: expected `%% key = value`")]
    BadDirective { line: usize },
    #[error("unknown phrase key `{key}`")]
    UnknownPhrase { key: String },
    #[error("phrase `{key}` cannot use `{{{argument}}}`")]
    UnknownPhraseArgument { key: String, argument: String },
}

/// Parses one template source.
pub fn parse_template(language: &str, text: &str) -> Result<PromptTemplate, TemplateError> {
    let mut phrases = Phrasebook::builtin(language);
    let mut lines = Vec::new();
    let mut offset = 0;
    let mut in_header = true;
    let mut body_start = 0;

    for (n, raw) in text.split_inclusive('\n').enumerate() {
        let start = offset;
        offset += raw.len();
        if in_header {
            if let Some(directive) = raw.strip_prefix("%%") {
                let (key, value) = directive
                    .split_once('=')
                    .ok_or(TemplateError::BadDirective { line: n + 1 })?;
                phrases.set(key.trim(), value.trim_end_matches(['\n', '\r']).trim())?;
                body_start = offset;
                continue;
            }
            in_header = false;
        }
        let (content, newline) = match raw.strip_suffix('\n') {
            Some(c) => (c.strip_suffix('\r').unwrap_or(c), true),
            None => (raw, false),
        };
        lines.push(Line {
            segments: scan_line(language, content, start)?,
            newline,
        });
    }

    let template = PromptTemplate {
        language: language.to_string(),
        body: text[body_start..].to_string(),
        phrases,
        lines,
    };
    for p in Placeholder::REQUIRED {
        if !template.uses(p) {
            return Err(TemplateError::MissingRequired {
                language: language.to_string(),
                name: p.name().into(),
            });
        }
    }
    Ok(template)
}

fn scan_line(language: &str, line: &str, base: usize) -> Result<Vec<Segment>, TemplateError> {
    let mut segments = Vec::new();
    let mut text = String::new();
    let mut chars = line.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '{' if chars.peek().map(|&(_, n)| n) == Some('{') => {
                chars.next();
                text.push('{');
            }
            '}' if chars.peek().map(|&(_, n)| n) == Some('}') => {
                chars.next();
                text.push('}');
            }
            '}' => {
                return Err(TemplateError::Unmatched {
                    language: language.into(),
                    offset: base + i,
                })
            }
            '{' => {
                let rest = &line[i + 1..];
                let close = rest.find('}').ok_or(TemplateError::Unclosed {
                    language: language.into(),
                    offset: base + i,
                })?;
                let name = &rest[..close];
                let slot = Placeholder::from_name(name).ok_or_else(|| TemplateError::UnknownPlaceholder {
                    language: language.into(),
                    name: name.into(),
                    offset: base + i,
                })?;
                if !text.is_empty() {
                    segments.push(Segment::Text(std::mem::take(&mut text)));
                }
                segments.push(Segment::Slot(slot));
                for _ in 0..=name.chars().count() {
                    chars.next();
                }
            }
            _ => text.push(c),
        }
    }
    if !text.is_empty() {
        segments.push(Segment::Text(text));
    }
    Ok(segments)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TemplateSet {
    pub templates: BTreeMap<String, PromptTemplate>,
}

impl TemplateSet {
    /// Parses whatever sources are given, without a coverage check.
    pub fn parse_all(sources: &IndexMap<String, String>) -> Result<Self, TemplateError> {
        let mut templates = BTreeMap::new();
        for (lang, text) in sources {
            templates.insert(lang.clone(), parse_template(lang, text)?);
        }
        Ok(TemplateSet { templates })
    }

    pub fn get(&self, language: &str) -> Option<&PromptTemplate> {
        self.templates.get(language)
    }
}

/// Parses one template per configured language.
pub fn load_templates(sources: &IndexMap<String, String>, languages: &[String]) -> Result<TemplateSet, TemplateError> {
    if let Some(missing) = languages.iter().find(|l| !sources.contains_key(*l)) {
        return Err(TemplateError::MissingLanguage {
            language: missing.clone(),
        });
    }
    TemplateSet::parse_all(sources)
}

pub fn template_file_name(config_name: &str, language: &str) -> String {
    format!("{config_name}_{language}.txt")
}

/// Reads `<name>_<lang>.txt` for each configured language that has a file.
pub fn read_template_dir(dir: &Path, config: &GameConfig) -> std::io::Result<IndexMap<String, String>> {
    let mut sources = IndexMap::new();
    for lang in &config.languages {
        let path = dir.join(template_file_name(&config.name, lang));
        match std::fs::read_to_string(&path) {
            Ok(text) => {
                sources.insert(lang.clone(), text);
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
    }
    Ok(sources)
}

/// Coverage and satisfiability of templates against a config.
pub fn validate_templates(templates: &TemplateSet, config: &GameConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let has_personality = config.personality_ids().iter().any(|p| p != NO_PERSONALITY);
    for lang in &config.languages {
        let Some(t) = templates.get(lang) else {
            report.push(
                FindingCode::MissingTemplate,
                format!("templates.{lang}"),
                format!("expected {}", template_file_name(&config.name, lang)),
            );
            continue;
        };
        if has_personality {
            continue;
        }
        for p in [Placeholder::Personality, Placeholder::OpponentPersonality] {
            if t.uses(p) {
                report.push(
                    FindingCode::UnsatisfiablePlaceholder,
                    format!("templates.{lang}"),
                    format!("{p} needs a personality other than `{NO_PERSONALITY}`"),
                );
            }
        }
    }
    report
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub const BODY: &str = "You play {game_name}. Round {current_round} of {n_rounds}. Options: {strategies}. {payoff_description} {round_info}";

    pub const FULL: &str = "You are playing {game_name}.\n\
{personality}\n\
{opponent_personality}\n\
{round_info}\n\
{payoff_description}\n\
{history}\n\
{incoming_message}\n\
Your options are: {strategies}.\n";
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::config::fixtures::pd_config;

    fn sources(pairs: &[(&str, &str)]) -> IndexMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn accepts_known_placeholders() {
        let t = parse_template("en", BODY).unwrap();
        assert_eq!(t.placeholders().len(), 6);
    }

    #[test]
    fn unknown_placeholder_is_named_with_offset() {
        let text = "{strategies} {payoff_description} {round_info} {opponent_move_this_round}";
        let err = parse_template("en", text).unwrap_err();
        assert_eq!(
            err,
            TemplateError::UnknownPlaceholder {
                language: "en".into(),
                name: "opponent_move_this_round".into(),
                offset: 47
            }
        );
    }

    #[test]
    fn required_placeholders_enforced() {
        let err = parse_template("en", "{strategies} {round_info}").unwrap_err();
        assert_eq!(
            err,
            TemplateError::MissingRequired {
                language: "en".into(),
                name: "payoff_description".into()
            }
        );
    }

    #[test]
    fn escaped_braces_and_stray_delimiters() {
        let t = parse_template("en", "{{json}} {strategies} {payoff_description} {round_info}").unwrap();
        assert_eq!(t.lines[0].segments[0], Segment::Text("{json} ".into()));
        assert!(matches!(
            parse_template("en", "{strategies"),
            Err(TemplateError::Unclosed { offset: 0, .. })
        ));
        assert!(matches!(
            parse_template("en", "a } b"),
            Err(TemplateError::Unmatched { offset: 2, .. })
        ));
    }

    #[test]
    fn offsets_count_from_file_start() {
        let text = "%% list_separator = ; \nline one\n{nope}";
        match parse_template("en", text).unwrap_err() {
            TemplateError::UnknownPlaceholder { offset, .. } => assert_eq!(&text[offset..offset + 6], "{nope}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_overrides_phrases() {
        let t = parse_template(
            "en",
            "%% personality = Play as a {text} agent.\n{strategies}{payoff_description}{round_info}",
        )
        .unwrap();
        assert_eq!(t.phrases.raw("personality"), "Play as a {text} agent.");
        assert!(!t.body.contains("%%"));
        assert!(matches!(
            parse_template("en", "%% nonsense\n"),
            Err(TemplateError::BadDirective { line: 1 })
        ));
    }

    #[test]
    fn missing_language_is_an_error() {
        let langs = vec!["en".to_string(), "fr".to_string()];
        let err = load_templates(&sources(&[("en", BODY)]), &langs).unwrap_err();
        assert_eq!(err, TemplateError::MissingLanguage { language: "fr".into() });
        assert!(load_templates(&sources(&[("en", BODY), ("fr", BODY)]), &langs).is_ok());
    }

    #[test]
    fn full_coverage_validates_clean() {
        let config = pd_config();
        let set = TemplateSet::parse_all(&sources(&[("en", FULL), ("fr", FULL)])).unwrap();
        assert!(validate_templates(&set, &config).is_clean());
    }

    #[test]
    fn personality_needs_a_real_personality() {
        let mut config = pd_config();
        for map in config.agents.personalities.values_mut() {
            *map = [(NO_PERSONALITY.to_string(), String::new())].into_iter().collect();
        }
        let set = TemplateSet::parse_all(&sources(&[("en", FULL), ("fr", BODY)])).unwrap();
        let report = validate_templates(&set, &config);
        assert_eq!(report.findings.len(), 2);
        assert!(report
            .findings
            .iter()
            .all(|f| f.code == FindingCode::UnsatisfiablePlaceholder));
    }

    #[test]
    fn uncovered_language_is_a_finding() {
        let mut config = pd_config();
        config.languages.push("vn".into());
        let set = TemplateSet::parse_all(&sources(&[("en", FULL), ("fr", FULL)])).unwrap();
        let report = validate_templates(&set, &config);
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].code, FindingCode::MissingTemplate);
        assert_eq!(report.findings[0].path, "templates.vn");
    }

    #[test]
    fn reads_files_by_naming_convention() {
        let dir = tempfile::tempdir().unwrap();
        let config = pd_config();
        std::fs::write(dir.path().join("prisoners_dilemma_en.txt"), FULL).unwrap();
        let found = read_template_dir(dir.path(), &config).unwrap();
        assert_eq!(found.keys().collect::<Vec<_>>(), vec!["en"]);
    }
}
