//! Localized sentences wrapped around placeholder values.
//!
//! Each phrase may reference its own arguments in braces, e.g.
//! `{current}`. Templates can override any phrase with a leading
//! `%% key = value` line.

use std::collections::BTreeMap;

use super::TemplateError;

/// Phrase keys and the arguments each one may reference.
pub const KEYS: &[(&str, &[&str])] = &[
    ("round_known", &["current", "total"]),
    ("round_unknown", &["current"]),
    ("rounds_unknown_word", &[]),
    ("personality", &["text"]),
    ("opponent_certain", &["text"]),
    ("opponent_probable", &["text", "prob"]),
    ("payoff_penalty", &["mine", "theirs", "you", "them"]),
    ("payoff_reward", &["mine", "theirs", "you", "them"]),
    ("history_header", &[]),
    ("history_penalty", &["round", "mine", "theirs", "you", "them"]),
    ("history_reward", &["round", "mine", "theirs", "you", "them"]),
    ("incoming_message", &["message"]),
    ("answer_instruction", &["labels"]),
    ("retry_notice", &["labels"]),
    ("message_instruction", &[]),
    ("list_separator", &[]),
];

const EN: &[&str] = &[
    "This is round {current} of {total}.",
    "This is round {current}. The total number of rounds is unknown.",
    "unknown",
    "You are {text}.",
    "The other agent is {text}.",
    "The other agent is {text} with probability {prob}.",
    "If you choose {mine} and the other agent chooses {theirs}, you lose {you} points and the other agent loses {them} points.",
    "If you choose {mine} and the other agent chooses {theirs}, you earn {you} points and the other agent earns {them} points.",
    "Previous rounds:",
    "Round {round}: you chose {mine} and the other agent chose {theirs}; you lost {you} points and the other agent lost {them} points.",
    "Round {round}: you chose {mine} and the other agent chose {theirs}; you earned {you} points and the other agent earned {them} points.",
    "The other agent sent you this message: {message}",
    "Answer with exactly one of: {labels}.",
    "Your previous answer could not be understood. Reply with only one of: {labels}.",
    "Before deciding, write one short message to the other agent. Reply with the message only.",
    ", ",
];

const FR: &[&str] = &[
    "Ceci est le tour {current} sur {total}.",
    "Ceci est le tour {current}. Le nombre total de tours est inconnu.",
    "inconnu",
    "Vous êtes {text}.",
    "L'autre agent est {text}.",
    "L'autre agent est {text} avec une probabilité de {prob}.",
    "Si vous choisissez {mine} et que l'autre agent choisit {theirs}, vous perdez {you} points et l'autre agent perd {them} points.",
    "Si vous choisissez {mine} et que l'autre agent choisit {theirs}, vous gagnez {you} points et l'autre agent gagne {them} points.",
    "Tours précédents :",
    "Tour {round} : vous avez choisi {mine} et l'autre agent a choisi {theirs} ; vous avez perdu {you} points et l'autre agent a perdu {them} points.",
    "Tour {round} : vous avez choisi {mine} et l'autre agent a choisi {theirs} ; vous avez gagné {you} points et l'autre agent a gagné {them} points.",
    "L'autre agent vous a envoyé ce message : {message}",
    "Répondez avec exactement une option parmi : {labels}.",
    "Votre réponse précédente n'a pas pu être comprise. Répondez uniquement avec une option parmi : {labels}.",
    "Avant de décider, écrivez un court message à l'autre agent. Répondez uniquement avec le message.",
    ", ",
];

const AR: &[&str] = &[
    "هذه هي الجولة {current} من {total}.",
    "هذه هي الجولة {current}. العدد الإجمالي للجولات غير معروف.",
    "غير معروف",
    "أنت {text}.",
    "الوكيل الآخر {text}.",
    "الوكيل الآخر {text} باحتمال {prob}.",
    "إذا اخترت {mine} واختار الوكيل الآخر {theirs}، تخسر {you} نقاط ويخسر الوكيل الآخر {them} نقاط.",
    "إذا اخترت {mine} واختار الوكيل الآخر {theirs}، تكسب {you} نقاط ويكسب الوكيل الآخر {them} نقاط.",
    "الجولات السابقة:",
    "الجولة {round}: اخترت {mine} واختار الوكيل الآخر {theirs}؛ خسرت {you} نقاط وخسر الوكيل الآخر {them} نقاط.",
    "الجولة {round}: اخترت {mine} واختار الوكيل الآخر {theirs}؛ كسبت {you} نقاط وكسب الوكيل الآخر {them} نقاط.",
    "أرسل لك الوكيل الآخر هذه الرسالة: {message}",
    "أجب بخيار واحد فقط من: {labels}.",
    "تعذر فهم إجابتك السابقة. أجب بخيار واحد فقط من: {labels}.",
    "قبل اتخاذ القرار، اكتب رسالة قصيرة إلى الوكيل الآخر. أجب بالرسالة فقط.",
    "، ",
];

const ZH: &[&str] = &[
    "这是第 {current} 轮，共 {total} 轮。",
    "这是第 {current} 轮。总轮数未知。",
    "未知",
    "你的性格是：{text}。",
    "另一个智能体的性格是：{text}。",
    "另一个智能体的性格有 {prob} 的概率是：{text}。",
    "如果你选择{mine}而另一个智能体选择{theirs}，你失去 {you} 分，另一个智能体失去 {them} 分。",
    "如果你选择{mine}而另一个智能体选择{theirs}，你获得 {you} 分，另一个智能体获得 {them} 分。",
    "之前的回合：",
    "第 {round} 轮：你选择了{mine}，另一个智能体选择了{theirs}；你失去了 {you} 分，另一个智能体失去了 {them} 分。",
    "第 {round} 轮：你选择了{mine}，另一个智能体选择了{theirs}；你获得了 {you} 分，另一个智能体获得了 {them} 分。",
    "另一个智能体给你发送了这条消息：{message}",
    "请只用以下选项之一回答：{labels}。",
    "无法理解你之前的回答。请只用以下选项之一回答：{labels}。",
    "在做决定之前，给另一个智能体写一条简短的消息。只回复消息内容。",
    "、",
];

const VI: &[&str] = &[
    "Đây là vòng {current} trên tổng số {total} vòng.",
    "Đây là vòng {current}. Tổng số vòng không được biết.",
    "không xác định",
    "Bạn là người {text}.",
    "Tác nhân kia là người {text}.",
    "Tác nhân kia là người {text} với xác suất {prob}.",
    "Nếu bạn chọn {mine} và tác nhân kia chọn {theirs}, bạn mất {you} điểm và tác nhân kia mất {them} điểm.",
    "Nếu bạn chọn {mine} và tác nhân kia chọn {theirs}, bạn được {you} điểm và tác nhân kia được {them} điểm.",
    "Các vòng trước:",
    "Vòng {round}: bạn đã chọn {mine} và tác nhân kia đã chọn {theirs}; bạn mất {you} điểm và tác nhân kia mất {them} điểm.",
    "Vòng {round}: bạn đã chọn {mine} và tác nhân kia đã chọn {theirs}; bạn được {you} điểm và tác nhân kia được {them} điểm.",
    "Tác nhân kia đã gửi cho bạn tin nhắn này: {message}",
    "Hãy trả lời bằng đúng một trong các lựa chọn: {labels}.",
    "Không thể hiểu câu trả lời trước của bạn. Chỉ trả lời bằng một trong các lựa chọn: {labels}.",
    "Trước khi quyết định, hãy viết một tin nhắn ngắn cho tác nhân kia. Chỉ trả lời bằng tin nhắn.",
    ", ",
];

fn builtin(language: &str) -> &'static [&'static str] {
    match language {
        "fr" => FR,
        "ar" => AR,
        "zh" => ZH,
        "vi" | "vn" => VI,
        _ => EN,
    }
}

/// Languages with built-in phrases. Anything else falls back to English
/// unless the template overrides every phrase it needs.
pub fn has_builtin(language: &str) -> bool {
    matches!(language, "en" | "fr" | "ar" | "zh" | "vi" | "vn")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Phrasebook {
    phrases: BTreeMap<&'static str, String>,
}

impl Phrasebook {
    pub fn builtin(language: &str) -> Self {
        let phrases = KEYS
            .iter()
            .zip(builtin(language))
            .map(|((k, _), v)| (*k, v.to_string()))
            .collect();
        Phrasebook { phrases }
    }

    /// Replaces one phrase after checking the key and its arguments.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), TemplateError> {
        let (k, allowed) = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| TemplateError::UnknownPhrase { key: key.to_string() })?;
        for arg in phrase_args(value) {
            if !allowed.contains(&arg.as_str()) {
                return Err(TemplateError::UnknownPhraseArgument {
                    key: key.to_string(),
                    argument: arg,
                });
            }
        }
        self.phrases.insert(k, value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.phrases.get(key).map(String::as_str).unwrap_or("")
    }

    /// The phrase with each `{arg}` replaced by its value.
    pub fn fill(&self, key: &str, args: &[(&str, &str)]) -> String {
        let phrase = self.raw(key);
        let mut out = String::with_capacity(phrase.len() + 16);
        let mut rest = phrase;
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            match after.find('}') {
                Some(close) => {
                    let name = &after[..close];
                    match args.iter().find(|(k, _)| *k == name) {
                        Some((_, v)) => out.push_str(v),
                        None => out.push_str(&rest[open..open + close + 2]),
                    }
                    rest = &after[close + 1..];
                }
                None => {
                    out.push_str(&rest[open..]);
                    rest = "";
                }
            }
        }
        out.push_str(rest);
        out
    }

    pub fn join(&self, items: &[String]) -> String {
        items.join(self.raw("list_separator"))
    }
}

fn phrase_args(value: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = value;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                out.push(after[..close].to_string());
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_language_defines_every_key() {
        for table in [EN, FR, AR, ZH, VI] {
            assert_eq!(table.len(), KEYS.len());
            for ((key, allowed), phrase) in KEYS.iter().zip(table) {
                for arg in phrase_args(phrase) {
                    assert!(allowed.contains(&arg.as_str()), "{key}: {arg}");
                }
            }
        }
    }

    #[test]
    fn unknown_round_phrases_never_mention_the_total() {
        for lang in ["en", "fr", "ar", "zh", "vi"] {
            let book = Phrasebook::builtin(lang);
            assert!(book.raw("round_known").contains("{total}"), "{lang}");
            assert!(!book.raw("round_unknown").contains("{total}"), "{lang}");
        }
    }

    #[test]
    fn fill_substitutes_named_arguments() {
        let book = Phrasebook::builtin("en");
        assert_eq!(
            book.fill("round_known", &[("current", "3"), ("total", "10")]),
            "This is round 3 of 10."
        );
    }

    #[test]
    fn overrides_are_checked() {
        let mut book = Phrasebook::builtin("en");
        book.set("personality", "Act as a {text} player.").unwrap();
        assert_eq!(
            book.fill("personality", &[("text", "selfish")]),
            "Act as a selfish player."
        );
        assert!(book.set("personality", "{mood}").is_err());
        assert!(book.set("mood", "x").is_err());
    }

    #[test]
    fn vn_aliases_vietnamese() {
        assert_eq!(Phrasebook::builtin("vn"), Phrasebook::builtin("vi"));
        assert_eq!(Phrasebook::builtin("xx"), Phrasebook::builtin("en"));
    }
}
