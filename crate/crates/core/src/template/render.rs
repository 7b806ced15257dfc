use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Line, Phrasebook, Placeholder, PromptTemplate, Segment};
use crate::numfmt::plain;
use crate::payoff::Orientation;

/// One joint outcome seen from the prompted agent's side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffLine {
    pub mine: String,
    pub theirs: String,
    pub you: f64,
    pub them: f64,
}

/// A completed round seen from the prompted agent's side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PastRound {
    pub round: u32,
    pub mine: String,
    pub theirs: String,
    pub you: f64,
    pub them: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundContext {
    pub game_name: String,
    pub n_rounds: u32,
    /// 1-based.
    pub current_round: u32,
    pub n_rounds_is_known: bool,
    pub personality_text: String,
    pub opponent_personality_text: String,
    /// Probability attached to the opponent sentence; 0 omits it.
    pub opponent_prob: f64,
    /// Localized strategy labels in declaration order.
    pub strategies: Vec<String>,
    pub orientation: Orientation,
    pub payoffs: Vec<PayoffLine>,
    /// Rounds 1..current_round-1, oldest first.
    pub history: Vec<PastRound>,
    pub incoming_message: Option<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("current round {current} outside 1..={total}")]
    RoundOutOfRange { current: u32, total: u32 },
    #[error("history must cover rounds 1..{expected}, got {found} entries")]
    HistoryMismatch { expected: u32, found: usize },
}

impl RoundContext {
    pub fn check(&self) -> Result<(), RenderError> {
        if self.current_round < 1 || self.current_round > self.n_rounds {
            return Err(RenderError::RoundOutOfRange {
                current: self.current_round,
                total: self.n_rounds,
            });
        }
        let expected = self.current_round - 1;
        let ordered = self.history.iter().enumerate().all(|(i, r)| r.round as usize == i + 1);
        if self.history.len() != expected as usize || !ordered {
            return Err(RenderError::HistoryMismatch {
                expected,
                found: self.history.len(),
            });
        }
        Ok(())
    }

    pub fn payoff_description(&self, book: &Phrasebook) -> String {
        let key = match self.orientation {
            Orientation::Penalty => "payoff_penalty",
            Orientation::Reward => "payoff_reward",
        };
        self.payoffs
            .iter()
            .map(|l| {
                book.fill(
                    key,
                    &[
                        ("mine", &l.mine),
                        ("theirs", &l.theirs),
                        ("you", &plain(l.you)),
                        ("them", &plain(l.them)),
                    ],
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Empty on round 1; afterwards a header plus one line per past round.
    pub fn history_text(&self, book: &Phrasebook) -> String {
        if self.history.is_empty() {
            return String::new();
        }
        let key = match self.orientation {
            Orientation::Penalty => "history_penalty",
            Orientation::Reward => "history_reward",
        };
        let mut out = book.raw("history_header").to_string();
        for r in &self.history {
            out.push('\n');
            out.push_str(&book.fill(
                key,
                &[
                    ("round", &r.round.to_string()),
                    ("mine", &r.mine),
                    ("theirs", &r.theirs),
                    ("you", &plain(r.you)),
                    ("them", &plain(r.them)),
                ],
            ));
        }
        out
    }

    fn value(&self, slot: Placeholder, book: &Phrasebook) -> String {
        match slot {
            Placeholder::GameName => self.game_name.clone(),
            Placeholder::NRounds if self.n_rounds_is_known => self.n_rounds.to_string(),
            Placeholder::NRounds => book.raw("rounds_unknown_word").to_string(),
            Placeholder::CurrentRound => self.current_round.to_string(),
            Placeholder::RoundInfo => {
                let current = self.current_round.to_string();
                if self.n_rounds_is_known {
                    book.fill(
                        "round_known",
                        &[("current", &current), ("total", &self.n_rounds.to_string())],
                    )
                } else {
                    book.fill("round_unknown", &[("current", &current)])
                }
            }
            Placeholder::Personality if self.personality_text.is_empty() => String::new(),
            Placeholder::Personality => book.fill("personality", &[("text", &self.personality_text)]),
            Placeholder::OpponentPersonality => {
                let text = &self.opponent_personality_text;
                if text.is_empty() || self.opponent_prob.is_nan() || self.opponent_prob <= 0.0 {
                    String::new()
                } else if self.opponent_prob >= 1.0 {
                    book.fill("opponent_certain", &[("text", text)])
                } else {
                    book.fill(
                        "opponent_probable",
                        &[("text", text), ("prob", &plain(self.opponent_prob))],
                    )
                }
            }
            Placeholder::Strategies => book.join(&self.strategies),
            Placeholder::PayoffDescription => self.payoff_description(book),
            Placeholder::History => self.history_text(book),
            Placeholder::IncomingMessage => match &self.incoming_message {
                Some(m) if !m.trim().is_empty() => book.fill("incoming_message", &[("message", m.trim())]),
                _ => String::new(),
            },
        }
    }
}

/// Substitutes every placeholder. Lines whose placeholders all rendered
/// empty (and hold nothing else) are dropped.
pub fn render_prompt(template: &PromptTemplate, ctx: &RoundContext) -> Result<String, RenderError> {
    ctx.check()?;
    let mut out = String::new();
    for line in &template.lines {
        let text = render_line(line, ctx, &template.phrases);
        if line.has_slot() && text.trim().is_empty() {
            continue;
        }
        out.push_str(&text);
        if line.newline {
            out.push('\n');
        }
    }
    Ok(out)
}

fn render_line(line: &Line, ctx: &RoundContext, book: &Phrasebook) -> String {
    let mut out = String::new();
    let mut swallow_space = false;
    for seg in &line.segments {
        match seg {
            Segment::Text(t) => {
                let t = match t.strip_prefix(' ') {
                    Some(rest) if swallow_space => rest,
                    _ => t.as_str(),
                };
                out.push_str(t);
                swallow_space = false;
            }
            Segment::Slot(p) => {
                let v = ctx.value(*p, book);
                // an omitted sentence should not leave a double space behind
                swallow_space = v.is_empty() && (out.is_empty() || out.ends_with(' '));
                out.push_str(&v);
            }
        }
    }
    if line.has_slot() {
        out.truncate(out.trim_end_matches(' ').len());
    }
    out
}
