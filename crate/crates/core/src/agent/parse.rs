use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseFailure {
    #[error("reply names none of the options")]
    NoMatch,
    #[error("reply names more than one option: {0:?}")]
    AmbiguousMatch(Vec<String>),
}

/// Maps a free-text reply to one strategy id.
///
/// Tries, in order: the whole trimmed reply equal to an id or label; labels
/// found anywhere in the reply (case-insensitive, not inside a longer ASCII
/// word); ids found as standalone words (case-sensitive). A step that finds
/// more than one distinct strategy fails instead of guessing.
pub fn parse_strategy_response(reply: &str, ids: &[String], labels: &[String]) -> Result<String, ParseFailure> {
    let trimmed = reply.trim();
    for (i, id) in ids.iter().enumerate() {
        let label = labels.get(i).map(String::as_str).unwrap_or(id);
        if trimmed == id || trimmed.to_lowercase() == label.to_lowercase() {
            return Ok(id.clone());
        }
    }

    let lower = trimmed.to_lowercase();
    let by_label: Vec<usize> = (0..ids.len())
        .filter(|&i| {
            labels
                .get(i)
                .is_some_and(|l| !l.is_empty() && contains_word(&lower, &l.to_lowercase()))
        })
        .collect();
    let by_id: Vec<usize> = (0..ids.len()).filter(|&i| contains_word(trimmed, &ids[i])).collect();

    for hits in [by_label, by_id] {
        match hits.as_slice() {
            [] => continue,
            [i] => return Ok(ids[*i].clone()),
            many => {
                return Err(ParseFailure::AmbiguousMatch(
                    many.iter().map(|&i| ids[i].clone()).collect(),
                ))
            }
        }
    }
    Err(ParseFailure::NoMatch)
}

/// `needle` occurs in `hay` with no ASCII letter or digit glued to either
/// end. Scripts without spaces (e.g. Chinese) are unaffected.
fn contains_word(hay: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let glued = |c: Option<char>| c.is_some_and(|c| c.is_ascii_alphanumeric());
    hay.match_indices(needle).any(|(at, m)| {
        let before = hay[..at].chars().next_back();
        let after = hay[at + m.len()..].chars().next();
        let edge_start = needle.chars().next().is_some_and(|c| c.is_ascii_alphanumeric());
        let edge_end = needle.chars().next_back().is_some_and(|c| c.is_ascii_alphanumeric());
        !(edge_start && glued(before)) && !(edge_end && glued(after))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> (Vec<String>, Vec<String>) {
        (vec!["A".into(), "B".into()], vec!["Option A".into(), "Option B".into()])
    }

    fn parse(reply: &str) -> Result<String, ParseFailure> {
        let (ids, labels) = ab();
        parse_strategy_response(reply, &ids, &labels)
    }

    #[test]
    fn exact_label() {
        assert_eq!(parse("Option A").unwrap(), "A");
        assert_eq!(parse("  option b \n").unwrap(), "B");
        assert_eq!(parse("B").unwrap(), "B");
    }

    #[test]
    fn unique_substring() {
        assert_eq!(parse("I will choose Option B this time.").unwrap(), "B");
        assert_eq!(parse("**OPTION A**").unwrap(), "A");
    }

    #[test]
    fn ties_fail() {
        assert_eq!(
            parse("Option A or Option B"),
            Err(ParseFailure::AmbiguousMatch(vec!["A".into(), "B".into()]))
        );
    }

    #[test]
    fn articles_are_not_ids() {
        assert_eq!(parse("a tough call, I pick B"), Ok("B".into()));
        assert_eq!(parse("I abstain"), Err(ParseFailure::NoMatch));
        assert_eq!(parse("Option AB"), Err(ParseFailure::NoMatch));
    }

    #[test]
    fn labels_win_over_stray_ids() {
        assert_eq!(parse("A wise player picks Option B"), Ok("B".into()));
    }

    #[test]
    fn unspaced_scripts() {
        let ids = vec!["A".to_string(), "B".to_string()];
        let labels = vec!["选项A".to_string(), "选项B".to_string()];
        assert_eq!(parse_strategy_response("我选择选项B。", &ids, &labels).unwrap(), "B");
    }

    proptest! {
        #[test]
        fn result_is_always_a_valid_id(reply in ".{1,80}") {
            let (ids, labels) = ab();
            if let Ok(id) = parse_strategy_response(&reply, &ids, &labels) {
                prop_assert!(ids.contains(&id));
            }
        }

        #[test]
        fn wrapped_label_is_found(prefix in "[ a-z,.]{0,20}", suffix in "[ a-z,.!]{0,20}", pick in 0usize..2) {
            let (ids, labels) = ab();
            let reply = format!("{prefix} {} {suffix}", labels[pick]);
            prop_assert_eq!(parse_strategy_response(&reply, &ids, &labels).unwrap(), ids[pick].clone());
        }
    }
}
