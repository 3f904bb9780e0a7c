use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ContentItem, ContentKind, RetrievalError};
use crate::kg::{DiscourseRelation, EntityId};
use crate::nlu::{check_profanity, classify_dialogue_act, DialogueAct, NluError, WordSet};
use crate::text;

const WEEKDAYS: &[&str] = &[
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday", "weekend",
];
const WEEKDAY_DEICTICS: &[&str] = &["last", "this", "next"];

/// Rejection reasons in precedence order: when several apply, the first
/// listed is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectRule {
    Malformed,
    Unsafe,
    Profanity,
    Pronoun,
    Temporal,
    Agreement,
}

impl RejectRule {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectRule::Malformed => "malformed",
            RejectRule::Unsafe => "unsafe",
            RejectRule::Profanity => "profanity",
            RejectRule::Pronoun => "pronoun",
            RejectRule::Temporal => "temporal",
            RejectRule::Agreement => "agreement",
        }
    }
}

impl fmt::Display for RejectRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One line of the rejection report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub rule: RejectRule,
    /// Every rule that fired, in precedence order; `rule` is the first.
    #[serde(skip)]
    pub all_rules: Vec<RejectRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub accepted: Vec<ContentItem>,
    pub rejections: Vec<Rejection>,
}

/// Word lists used by the ingestion filters.
#[derive(Debug, Clone, Default)]
pub struct FilterConfig {
    pub profanity: WordSet,
    pub stopwords: WordSet,
    pub pronouns: WordSet,
    pub temporal: Vec<Vec<String>>,
    pub agreement: Vec<Vec<String>>,
    /// When set, `dialogue_turn` items skip the anaphora rules.
    pub whitelist_dialogue_turns: bool,
}

fn phrase_list(path: &Path) -> Result<Vec<Vec<String>>, NluError> {
    let body = fs::read_to_string(path).map_err(|e| NluError::resource(path, e))?;
    Ok(body
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("//"))
        .map(text::tokenize)
        .filter(|t| !t.is_empty())
        .collect())
}

impl FilterConfig {
    /// Loads `profanity.txt` and `stopwords.txt` from `nlu_dir`, and
    /// `pronouns.txt`, `temporal.txt` and `agreement.txt` from `ingest_dir`.
    pub fn load(nlu_dir: &Path, ingest_dir: &Path) -> Result<Self, NluError> {
        Ok(FilterConfig {
            profanity: WordSet::load(&nlu_dir.join("profanity.txt"))?,
            stopwords: WordSet::load(&nlu_dir.join("stopwords.txt"))?,
            pronouns: WordSet::load(&ingest_dir.join("pronouns.txt"))?,
            temporal: phrase_list(&ingest_dir.join("temporal.txt"))?,
            agreement: phrase_list(&ingest_dir.join("agreement.txt"))?,
            whitelist_dialogue_turns: true,
        })
    }

    /// A pronoun is tolerated only when a capitalized content token earlier
    /// in the same item could serve as its antecedent.
    fn has_unresolved_pronoun(&self, raw: &str) -> bool {
        let mut antecedent = false;
        for raw_tok in raw.split_whitespace() {
            let tok = text::normalize_token(raw_tok);
            if tok.is_empty() {
                continue;
            }
            if self.pronouns.contains(&tok) {
                if !antecedent {
                    return true;
                }
                continue;
            }
            let capitalized = raw_tok
                .trim_start_matches(|c: char| !c.is_alphanumeric())
                .starts_with(char::is_uppercase);
            let temporal_word = self.temporal.iter().any(|p| p.len() == 1 && p[0] == tok);
            if capitalized && !self.stopwords.contains(&tok) && !temporal_word {
                antecedent = true;
            }
        }
        false
    }

    fn has_temporal(&self, tokens: &[String]) -> bool {
        if self.temporal.iter().any(|p| text::contains_phrase(tokens, p)) {
            return true;
        }
        tokens.windows(2).any(|w| {
            WEEKDAY_DEICTICS.contains(&w[0].as_str())
                && WEEKDAYS.contains(&w[1].trim_end_matches('s'))
        })
    }

    fn has_agreement_opener(&self, tokens: &[String]) -> bool {
        self.agreement.iter().any(|p| tokens.starts_with(p))
    }

    /// All rules that fire for an item, in precedence order.
    pub fn violations(&self, item: &ContentItem) -> Vec<RejectRule> {
        let mut out = Vec::new();
        if !item.safe {
            out.push(RejectRule::Unsafe);
        }
        if check_profanity(&item.text, &self.profanity) {
            out.push(RejectRule::Profanity);
        }
        if self.whitelist_dialogue_turns && item.kind == ContentKind::DialogueTurn {
            return out;
        }
        let tokens = text::tokenize(&item.text);
        if self.has_unresolved_pronoun(&item.text) {
            out.push(RejectRule::Pronoun);
        }
        if self.has_temporal(&tokens) {
            out.push(RejectRule::Temporal);
        }
        if self.has_agreement_opener(&tokens) {
            out.push(RejectRule::Agreement);
        }
        out
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawItem {
    id: String,
    text: String,
    kind: ContentKind,
    #[serde(default)]
    topic: Option<String>,
    #[serde(default)]
    entities: Vec<EntityId>,
    #[serde(default)]
    dialogue_act: Option<DialogueAct>,
    #[serde(default)]
    discourse_relation: Option<DiscourseRelation>,
    #[serde(default)]
    intimacy_level: Option<u32>,
    #[serde(default)]
    safe: Option<bool>,
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    agent_answer: Option<String>,
}

fn parse_item(line: &str) -> Result<ContentItem, (Option<String>, String)> {
    let raw: RawItem = serde_json::from_str(line).map_err(|e| {
        let id = serde_json::from_str::<serde_json::Value>(line)
            .ok()
            .and_then(|v| v.get("id").and_then(|i| i.as_str()).map(str::to_string));
        (id, e.to_string())
    })?;
    let id = Some(raw.id.clone());
    if raw.id.trim().is_empty() {
        return Err((None, "empty id".into()));
    }
    if raw.text.trim().is_empty() {
        return Err((id, "empty text".into()));
    }
    let is_intimacy = raw.kind == ContentKind::IntimacyQuestion;
    match (is_intimacy, raw.intimacy_level) {
        (true, None) => return Err((id, "intimacy_question without intimacy_level".into())),
        (true, Some(0)) => return Err((id, "intimacy_level must be at least 1".into())),
        (false, Some(_)) => return Err((id, "intimacy_level on a non-intimacy item".into())),
        _ => {}
    }
    Ok(ContentItem {
        dialogue_act: raw.dialogue_act.unwrap_or_else(|| classify_dialogue_act(&raw.text)),
        id: raw.id,
        text: raw.text.trim().to_string(),
        kind: raw.kind,
        topic: raw.topic.unwrap_or_else(|| "general".into()),
        entities: raw.entities,
        discourse_relation: raw.discourse_relation,
        intimacy_level: raw.intimacy_level,
        safe: raw.safe.unwrap_or(true),
        source: raw.source.unwrap_or_else(|| "pack".into()),
        agent_answer: raw.agent_answer,
    })
}

/// Parses and filters a JSON-lines pack. Malformed records are reported and
/// skipped; ingestion always continues.
pub fn ingest(pack: &str, cfg: &FilterConfig) -> IngestReport {
    let mut report = IngestReport::default();
    for (n, line) in pack.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_item(line) {
            Err((id, msg)) => report.rejections.push(Rejection {
                id: id.unwrap_or_else(|| format!("line:{}", n + 1)),
                rule: RejectRule::Malformed,
                all_rules: vec![RejectRule::Malformed],
                detail: Some(msg),
            }),
            Ok(item) => {
                let fired = cfg.violations(&item);
                match fired.first() {
                    None => report.accepted.push(item),
                    Some(&rule) => report.rejections.push(Rejection {
                        id: item.id,
                        rule,
                        all_rules: fired,
                        detail: None,
                    }),
                }
            }
        }
    }
    report
}

pub fn ingest_file(path: &Path, cfg: &FilterConfig) -> Result<IngestReport, RetrievalError> {
    let body = fs::read_to_string(path).map_err(|e| RetrievalError::Resource {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    Ok(ingest(&body, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FilterConfig {
        FilterConfig {
            profanity: WordSet::from_words(["darn"]),
            stopwords: WordSet::from_words(["the", "a", "at", "i", "in", "of", "is", "on"]),
            pronouns: WordSet::from_words(["he", "she", "it", "they", "his", "her", "him", "them"]),
            temporal: ["yesterday", "last night", "tonight"].iter().map(|p| text::tokenize(p)).collect(),
            agreement: ["yeah", "me too", "i agree"].iter().map(|p| text::tokenize(p)).collect(),
            whitelist_dialogue_turns: true,
        }
    }

    fn item(text: &str) -> String {
        serde_json::json!({"id": "x", "text": text, "kind": "fact", "topic": "science"}).to_string()
    }

    #[test]
    fn pronoun_and_temporal_both_fire() {
        let r = ingest(&item("He scored last night at the game"), &cfg());
        assert_eq!(r.rejections[0].rule, RejectRule::Pronoun);
        assert_eq!(r.rejections[0].all_rules, vec![RejectRule::Pronoun, RejectRule::Temporal]);
    }

    #[test]
    fn antecedent_in_item_keeps_pronoun() {
        let r = ingest(&item("Neo has eighty lines and most of his lines are questions."), &cfg());
        assert!(r.rejections.is_empty());
    }

    #[test]
    fn weekday_deixis_is_temporal() {
        let r = ingest(&item("The market opens next Tuesday."), &cfg());
        assert_eq!(r.rejections[0].rule, RejectRule::Temporal);
    }

    #[test]
    fn empty_text_is_malformed() {
        let r = ingest(&item(""), &cfg());
        assert_eq!(r.rejections[0].rule, RejectRule::Malformed);
        let r = ingest("{not json", &cfg());
        assert_eq!(r.rejections[0].id, "line:1");
    }
}
