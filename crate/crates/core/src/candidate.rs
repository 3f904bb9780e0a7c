//! Response candidates and the identifiers of the modules that produce them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kg::{DiscourseRelation, EntityId};
use crate::memory::Effect;
use crate::nlu::{classify_dialogue_act, DialogueAct};

/// Which party drives the conversation while a module holds the floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initiative {
    Mixed,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModuleId {
    Base,
    Opinions,
    QuestionAnswering,
    Wellbeing,
    Intimacy,
    OutOfDomain,
    Retrieval,
    Storytelling,
    Recommendation,
    Recursive,
    Flow(String),
}

impl ModuleId {
    pub fn flow(id: impl Into<String>) -> Self {
        ModuleId::Flow(id.into())
    }

    pub fn initiative(&self) -> Initiative {
        match self {
            ModuleId::Storytelling
            | ModuleId::Recommendation
            | ModuleId::Recursive
            | ModuleId::Intimacy
            | ModuleId::Flow(_) => Initiative::System,
            _ => Initiative::Mixed,
        }
    }

    pub fn is_system_initiative(&self) -> bool {
        self.initiative() == Initiative::System
    }

    pub fn is_flow(&self) -> bool {
        matches!(self, ModuleId::Flow(_))
    }

    pub fn flow_id(&self) -> Option<&str> {
        match self {
            ModuleId::Flow(id) => Some(id),
            _ => None,
        }
    }

    /// Short human description used in feedback prompts.
    pub fn describe(&self) -> String {
        match self {
            ModuleId::Storytelling => "one of my stories".into(),
            ModuleId::Recommendation => "some places worth seeing".into(),
            ModuleId::Recursive => "some fun facts".into(),
            ModuleId::Intimacy => "a few personal questions".into(),
            ModuleId::Flow(id) => id.replace('_', " "),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModuleId::Base => "base",
            ModuleId::Opinions => "opinions",
            ModuleId::QuestionAnswering => "qa",
            ModuleId::Wellbeing => "wellbeing",
            ModuleId::Intimacy => "intimacy",
            ModuleId::OutOfDomain => "out_of_domain",
            ModuleId::Retrieval => "retrieval",
            ModuleId::Storytelling => "storytelling",
            ModuleId::Recommendation => "recommendation",
            ModuleId::Recursive => "recursive",
            ModuleId::Flow(id) => return write!(f, "flow:{id}"),
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown module id `{0}`")]
pub struct UnknownModule(pub String);

impl FromStr for ModuleId {
    type Err = UnknownModule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "base" => ModuleId::Base,
            "opinions" => ModuleId::Opinions,
            "qa" => ModuleId::QuestionAnswering,
            "wellbeing" => ModuleId::Wellbeing,
            "intimacy" => ModuleId::Intimacy,
            "out_of_domain" => ModuleId::OutOfDomain,
            "retrieval" => ModuleId::Retrieval,
            "storytelling" => ModuleId::Storytelling,
            "recommendation" => ModuleId::Recommendation,
            "recursive" => ModuleId::Recursive,
            other => match other.strip_prefix("flow:") {
                Some(id) if !id.is_empty() => ModuleId::Flow(id.to_string()),
                _ => return Err(UnknownModule(s.to_string())),
            },
        })
    }
}

impl From<ModuleId> for String {
    fn from(m: ModuleId) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for ModuleId {
    type Error = UnknownModule;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Stable identifier of a prompt, used for repetition tracking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptId(pub String);

impl PromptId {
    pub fn new(id: impl Into<String>) -> Self {
        PromptId(id.into())
    }

    /// Id derived from the rendered text, so identical content shares an id
    /// in every session.
    pub fn from_text(module: &ModuleId, text: &str) -> Self {
        PromptId(format!("{module}:{}", crate::text::squash_whitespace(text).to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PromptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeRole {
    Statement,
    Question,
    #[default]
    None,
}

/// A proposed system reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCandidate {
    pub text: String,
    pub source_module: ModuleId,
    pub confidence: f64,
    pub dialogue_act: DialogueAct,
    pub discourse_relation: Option<DiscourseRelation>,
    pub topic: Option<String>,
    pub entities: Vec<EntityId>,
    pub prompt_id: PromptId,
    pub priority: bool,
    /// Higher wins among priority candidates.
    pub priority_rank: u8,
    pub mergeable_role: MergeRole,
    /// Trigger phrases; any of them in the user turn gives full context score.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<String>,
    /// Set when a flow delegated this turn to the producing module.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_behalf_of: Option<ModuleId>,
    pub safe: bool,
    /// Menu-type prompts may repeat; the ranker's repeat penalty handles them.
    #[serde(default)]
    pub menu: bool,
    /// State changes applied only if this candidate wins.
    #[serde(skip)]
    pub effects: Vec<Effect>,
}

impl ResponseCandidate {
    pub fn new(source: ModuleId, text: impl Into<String>, confidence: f64) -> Self {
        let text = text.into();
        let prompt_id = PromptId::from_text(&source, &text);
        ResponseCandidate {
            dialogue_act: classify_dialogue_act(&text),
            text,
            source_module: source,
            confidence: confidence.clamp(0.0, 1.0),
            discourse_relation: None,
            topic: None,
            entities: Vec::new(),
            prompt_id,
            priority: false,
            priority_rank: 0,
            mergeable_role: MergeRole::None,
            keywords: Vec::new(),
            on_behalf_of: None,
            safe: true,
            menu: false,
            effects: Vec::new(),
        }
    }

    pub fn act(mut self, act: DialogueAct) -> Self {
        self.dialogue_act = act;
        self
    }

    pub fn relation(mut self, rel: DiscourseRelation) -> Self {
        self.discourse_relation = Some(rel);
        self
    }

    pub fn topic(mut self, topic: impl Into<String>) -> Self {
        self.topic = Some(topic.into());
        self
    }

    pub fn maybe_topic(mut self, topic: Option<String>) -> Self {
        self.topic = topic;
        self
    }

    pub fn entities<I: IntoIterator<Item = EntityId>>(mut self, ids: I) -> Self {
        self.entities = ids.into_iter().collect();
        self
    }

    pub fn prompt(mut self, id: impl Into<String>) -> Self {
        self.prompt_id = PromptId(id.into());
        self
    }

    pub fn role(mut self, role: MergeRole) -> Self {
        self.mergeable_role = role;
        self
    }

    pub fn keywords<I, S>(mut self, kws: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.keywords = kws.into_iter().map(Into::into).collect();
        self
    }

    pub fn priority(mut self, rank: u8) -> Self {
        self.priority = true;
        self.priority_rank = rank;
        self
    }

    pub fn menu(mut self) -> Self {
        self.menu = true;
        self
    }

    pub fn on_behalf_of(mut self, owner: ModuleId) -> Self {
        self.on_behalf_of = Some(owner);
        self
    }

    pub fn effect(mut self, e: Effect) -> Self {
        self.effects.push(e);
        self
    }

    pub fn with_effects<I: IntoIterator<Item = Effect>>(mut self, es: I) -> Self {
        self.effects.extend(es);
        self
    }

    pub fn token_len(&self) -> usize {
        crate::text::tokenize(&self.text).len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_id_round_trips_through_strings() {
        for m in [
            ModuleId::Base,
            ModuleId::QuestionAnswering,
            ModuleId::OutOfDomain,
            ModuleId::flow("video_games"),
        ] {
            let s = m.to_string();
            assert_eq!(s.parse::<ModuleId>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(serde_json::from_str::<ModuleId>(&json).unwrap(), m);
        }
        assert!("flow:".parse::<ModuleId>().is_err());
        assert!("nope".parse::<ModuleId>().is_err());
    }

    #[test]
    fn prompt_id_is_stable_for_identical_text() {
        let a = PromptId::from_text(&ModuleId::Recursive, "Did you know?  Cats sleep.");
        let b = PromptId::from_text(&ModuleId::Recursive, "did you know? cats sleep.");
        assert_eq!(a, b);
    }
}
