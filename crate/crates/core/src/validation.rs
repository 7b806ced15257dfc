use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingCode {
    NRoundsZero,
    NoLanguages,
    DuplicateLanguage,
    TooFewAgents,
    DuplicateAgentName,
    MissingLanguagePersonalities,
    PersonalitySetMismatch,
    NoPersonalities,
    ProbabilityCountMismatch,
    ProbabilityOutOfRange,
    AssignmentLengthMismatch,
    UnknownPersonality,
    MissingLanguageStrategies,
    StrategySetMismatch,
    TooFewStrategies,
    AmbiguousCombinationLabel,
    DuplicateCombination,
    MissingCombination,
    UnexpectedCombination,
    MissingMatrixEntry,
    MatrixArity,
    UnknownWeight,
    NonFiniteWeight,
    UnknownCombination,
    MissingTemplate,
    UnsatisfiablePlaceholder,
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant serializes");
        f.write_str(s.as_str().unwrap_or("UNKNOWN"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub code: FindingCode,
    /// Dotted path to the offending field, e.g. `payoffMatrix.matrix.AB`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}

/// Findings are data, not failures: an empty report means valid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn push(&mut self, code: FindingCode, path: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            code,
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }

    pub fn has(&self, code: FindingCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_display_in_screaming_snake_case() {
        assert_eq!(FindingCode::UnknownCombination.to_string(), "UNKNOWN_COMBINATION");
        assert_eq!(FindingCode::NRoundsZero.to_string(), "N_ROUNDS_ZERO");
    }
}
