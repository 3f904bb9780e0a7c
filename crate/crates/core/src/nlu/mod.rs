//! Turn annotation: ASR filtering, profanity, intent, dialogue act, entity
//! detection, sentiment, topic and mood.
//!
//! Every annotator is immutable once its resources are loaded, so one
//! [`Annotator`] is shared by all sessions.

mod act;
mod asr;
mod entities;
mod intent;
mod lexicon;
mod mood;
mod topic;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::kg::{EntityId, KnowledgeGraph};
use crate::text;

pub use act::classify_dialogue_act;
pub use asr::{preprocess_asr, AsrOutcome};
pub use entities::detect_entities;
pub use intent::{IntentClassifier, IntentRule, DEFAULT_INVENTORY};
pub use lexicon::{check_profanity, SentimentLexicon, WordSet};
pub use mood::classify_mood;
pub use topic::{TopicClassifier, TopicEntry};

pub type TopicLabel = String;

#[derive(Debug, thiserror::Error)]
pub enum NluError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{path}: {msg}")]
    Resource { path: PathBuf, msg: String },
}

impl NluError {
    pub(crate) fn resource(path: &Path, msg: impl fmt::Display) -> Self {
        NluError::Resource {
            path: path.to_path_buf(),
            msg: msg.to_string(),
        }
    }
}

/// One recognizer hypothesis for a spoken turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsrHypothesis {
    pub text: String,
    /// Recognizer confidence in `[0, 1]`.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsrStatus {
    Accepted,
    NeedsClarification,
}

/// Intent name drawn from the loaded inventory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntentLabel(pub String);

impl IntentLabel {
    pub const UNKNOWN: &'static str = "unknown";

    pub fn new(name: impl Into<String>) -> Self {
        IntentLabel(name.into())
    }

    pub fn unknown() -> Self {
        IntentLabel(Self::UNKNOWN.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is(&self, name: &str) -> bool {
        self.0 == name
    }
}

impl fmt::Display for IntentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DialogueAct {
    YesNoQuestion,
    OpenQuestion,
    Statement,
    ProvideOpinion,
    Command,
    Greeting,
    Other,
}

impl DialogueAct {
    pub fn is_question(self) -> bool {
        matches!(self, DialogueAct::YesNoQuestion | DialogueAct::OpenQuestion)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DialogueAct::YesNoQuestion => "yes_no_question",
            DialogueAct::OpenQuestion => "open_question",
            DialogueAct::Statement => "statement",
            DialogueAct::ProvideOpinion => "provide_opinion",
            DialogueAct::Command => "command",
            DialogueAct::Greeting => "greeting",
            DialogueAct::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMention {
    pub surface: String,
    pub entity_id: EntityId,
    /// Token index range, end exclusive.
    pub span: (usize, usize),
    pub salience: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mood {
    Positive,
    Negative,
    #[default]
    Neutral,
    Bored,
    Offended,
    Hostile,
}

/// A fully annotated user turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedUtterance {
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub content_words: Vec<String>,
    pub intent: IntentLabel,
    pub dialogue_act: DialogueAct,
    pub entities: Vec<EntityMention>,
    pub sentiment: f64,
    pub topic: Option<TopicLabel>,
    pub profane: bool,
    pub asr_status: AsrStatus,
    /// All recognizer hypotheses, retained even when one was accepted.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hypotheses: Vec<AsrHypothesis>,
}

impl AnnotatedUtterance {
    pub fn entity_ids(&self) -> impl Iterator<Item = &EntityId> {
        self.entities.iter().map(|m| &m.entity_id)
    }

    pub fn has_intent(&self, name: &str) -> bool {
        self.intent.is(name)
    }

    pub fn mentions(&self, phrase: &str) -> bool {
        text::contains_phrase(&self.tokens, &text::tokenize(phrase))
    }

    pub fn is_question(&self) -> bool {
        self.dialogue_act.is_question()
    }

    fn clarification(raw_text: String, hypotheses: Vec<AsrHypothesis>) -> Self {
        AnnotatedUtterance {
            raw_text,
            tokens: Vec::new(),
            content_words: Vec::new(),
            intent: IntentLabel::unknown(),
            dialogue_act: DialogueAct::Other,
            entities: Vec::new(),
            sentiment: 0.0,
            topic: None,
            profane: false,
            asr_status: AsrStatus::NeedsClarification,
            hypotheses,
        }
    }
}

/// Raw turn input: typed text, recognizer hypotheses, or both.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TurnInput {
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub asr_hypotheses: Option<Vec<AsrHypothesis>>,
}

impl TurnInput {
    pub fn text(text: impl Into<String>) -> Self {
        TurnInput {
            text: Some(text.into()),
            asr_hypotheses: None,
        }
    }
}

/// Loaded annotation resources.
#[derive(Debug, Clone)]
pub struct Annotator {
    pub profanity: WordSet,
    pub stopwords: WordSet,
    pub sentiment: SentimentLexicon,
    pub intents: IntentClassifier,
    pub topics: TopicClassifier,
    pub asr_threshold: f64,
}

impl Annotator {
    /// Loads `profanity.txt`, `stopwords.txt`, `sentiment.tsv`,
    /// `intent_inventory.txt`, `intent_rules.jsonl` and `topics.jsonl` from `dir`.
    pub fn load(dir: &Path, asr_threshold: f64) -> Result<Self, NluError> {
        Ok(Annotator {
            profanity: WordSet::load(&dir.join("profanity.txt"))?,
            stopwords: WordSet::load(&dir.join("stopwords.txt"))?,
            sentiment: SentimentLexicon::load(&dir.join("sentiment.tsv"))?,
            intents: IntentClassifier::load(
                &dir.join("intent_inventory.txt"),
                &dir.join("intent_rules.jsonl"),
            )?,
            topics: TopicClassifier::load(&dir.join("topics.jsonl"))?,
            asr_threshold,
        })
    }

    pub fn content_words(&self, tokens: &[String]) -> Vec<String> {
        tokens
            .iter()
            .filter(|t| !self.stopwords.contains(t) && t.chars().any(char::is_alphanumeric))
            .cloned()
            .collect()
    }

    /// Annotates one turn. Pure in `(input, self, graph)`.
    pub fn annotate(
        &self,
        input: &TurnInput,
        graph: &KnowledgeGraph,
    ) -> Result<AnnotatedUtterance, NluError> {
        let hypotheses = input.asr_hypotheses.clone().unwrap_or_default();
        let raw = if !hypotheses.is_empty() {
            match preprocess_asr(&hypotheses, self.asr_threshold)? {
                AsrOutcome::Accepted(text) => text,
                AsrOutcome::NeedsClarification(all) => {
                    let top = all
                        .iter()
                        .max_by(|a, b| a.score.total_cmp(&b.score))
                        .map(|h| h.text.clone())
                        .unwrap_or_default();
                    return Ok(AnnotatedUtterance::clarification(top, all));
                }
            }
        } else {
            input.text.clone().unwrap_or_default()
        };
        let raw = raw.trim().to_string();
        let tokens = text::tokenize(&raw);
        if tokens.is_empty() {
            return Err(NluError::Input("empty utterance".into()));
        }
        let content_words = self.content_words(&tokens);
        let intent = self.intents.classify(&raw);
        let dialogue_act = classify_dialogue_act(&raw);
        let entities = detect_entities(&tokens, graph);
        let sentiment = self.sentiment.score(&tokens);
        let topic = self.topics.classify(&tokens);
        let profane = check_profanity(&raw, &self.profanity);
        Ok(AnnotatedUtterance {
            raw_text: raw,
            tokens,
            content_words,
            intent,
            dialogue_act,
            entities,
            sentiment,
            topic,
            profane,
            asr_status: AsrStatus::Accepted,
            hypotheses,
        })
    }
}
