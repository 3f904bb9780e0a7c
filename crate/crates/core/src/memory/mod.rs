//! Short-term session state, profiles and the long-term archive.
//!
//! A [`SessionState`] is only ever touched by one turn at a time. Modules
//! read it and describe the changes they want as [`Effect`]s; the engine
//! applies the winner's effects after ranking.

mod focus;
mod ltm;
mod profile;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::candidate::{ModuleId, PromptId};
use crate::kg::{DiscourseRelation, EntityId};
use crate::nlu::AnnotatedUtterance;

pub use focus::{is_third_person_pronoun, resolve_focus, FocusEntry, FocusStack};
pub use ltm::{ArchiveRecord, LtmArchive};
pub use profile::{
    init_agent_profile, AgentProfile, FeedbackEntry, Opinion, OpinionPack, Polarity, UserProfile,
};

#[derive(Debug, thiserror::Error)]
pub enum MemoryError {
    #[error("opinion pack is empty")]
    EmptyOpinionPack,
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("{path}: {msg}")]
    Resource { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    User,
    System,
}

/// Scalar state-variable value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// What the system said on one turn, as recorded in history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemTurn {
    pub text: String,
    pub source: ModuleId,
    pub prompt_id: PromptId,
    pub entities: Vec<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "speaker", rename_all = "snake_case")]
pub enum TurnContent {
    User(AnnotatedUtterance),
    System(SystemTurn),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    #[serde(flatten)]
    pub content: TurnContent,
    pub timestamp_ms: u64,
}

impl HistoryEntry {
    pub fn speaker(&self) -> Speaker {
        match self.content {
            TurnContent::User(_) => Speaker::User,
            TurnContent::System(_) => Speaker::System,
        }
    }

    pub fn text(&self) -> &str {
        match &self.content {
            TurnContent::User(u) => &u.raw_text,
            TurnContent::System(s) => &s.text,
        }
    }
}

/// Position inside a flow: the nodes whose preconditions are evaluated next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowCursor {
    pub expects: Vec<String>,
    pub last_node: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryCursor {
    pub story_id: String,
    /// Index of the next chunk to tell; 0 means only the intro was given.
    pub next_chunk: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    Facts,
    News,
    Riddle,
    WouldYouRather,
    Hypothetical,
}

impl LoopKind {
    /// Two-turn sequences pose a question and then react to the answer.
    pub fn is_sequence(self) -> bool {
        matches!(self, LoopKind::Riddle | LoopKind::WouldYouRather | LoopKind::Hypothetical)
    }

    pub fn describe(self) -> &'static str {
        match self {
            LoopKind::Facts => "facts",
            LoopKind::News => "news headlines",
            LoopKind::Riddle => "riddles",
            LoopKind::WouldYouRather => "would you rather questions",
            LoopKind::Hypothetical => "hypothetical questions",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecursiveLoop {
    pub kind: LoopKind,
    pub topic: String,
    /// Item whose answer the user is expected to give next (sequences only).
    pub awaiting: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "phase", content = "item")]
pub enum IntimacyPhase {
    #[default]
    Idle,
    /// A question was asked; the answer is expected next.
    Awaiting(String),
    /// The user was asked whether they would answer another question.
    Reoffered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationChain {
    pub focus: EntityId,
    pub last_relation: Option<DiscourseRelation>,
}

/// An offer standing for exactly one turn; an affirmative reply accepts it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "target")]
pub enum Offer {
    Flow(String),
    Story,
    Facts(String),
    Sequence(LoopKind, String),
    Intimacy,
    Wellbeing,
}

/// Expectations set by the previous system turn. They live for one turn.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Pending {
    pub offer: Option<Offer>,
    pub wellbeing_question: bool,
    pub feedback_for: Option<ModuleId>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModuleMemory {
    pub story: Option<StoryCursor>,
    pub recursive: Option<RecursiveLoop>,
    pub intimacy: IntimacyPhase,
    pub recommendation: Option<RecommendationChain>,
    pub consecutive_ood: u32,
}

/// A state change requested by a candidate, applied only if it wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "effect", content = "value")]
pub enum Effect {
    SetActive(ModuleId),
    /// Clears the active module if it is the given one.
    Release(ModuleId),
    SetVar(String, Scalar),
    ExploreTopic(String),
    ExploreModule(String),
    ExploreEntity(EntityId),
    PushFocus(EntityId),
    Offer(Offer),
    Story(Option<StoryCursor>),
    Loop(Option<RecursiveLoop>),
    Intimacy(IntimacyPhase),
    Recommendation(Option<RecommendationChain>),
    /// `None` exits the flow.
    Flow { id: String, cursor: Option<FlowCursor> },
    AskedWellbeing,
    AskedFeedback(ModuleId),
    /// A module engagement finished; counts toward feedback solicitation.
    Completed(ModuleId),
    Feedback(FeedbackEntry),
    Interest(String),
    Surface(PromptId),
    ResetFeedbackCounter,
    EndSession,
}

/// Per-conversation short-term memory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub history: Vec<HistoryEntry>,
    pub active_module: Option<ModuleId>,
    pub explored_topics: BTreeSet<String>,
    pub explored_modules: BTreeSet<String>,
    pub explored_entities: BTreeSet<EntityId>,
    pub surfaced_prompts: BTreeSet<PromptId>,
    pub focus: FocusStack,
    pub user_profile: UserProfile,
    pub agent_profile: AgentProfile,
    pub state_vars: BTreeMap<String, Scalar>,
    pub rng_seed: u64,
    #[serde(skip, default = "default_rng")]
    pub rng: ChaCha8Rng,
    pub turn_count: u32,
    pub flow_state: BTreeMap<String, FlowCursor>,
    pub modules: ModuleMemory,
    /// Expectations readable this turn.
    pub pending: Pending,
    /// Expectations being set up for the next turn.
    #[serde(skip)]
    pub next_pending: Pending,
    /// Engagements finished since feedback was last requested.
    pub completions: Vec<ModuleId>,
    pub last_reply: Option<String>,
    pub ended: bool,
}

fn default_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

impl SessionState {
    pub fn new(session_id: impl Into<String>, seed: u64, agent_profile: AgentProfile) -> Self {
        SessionState {
            session_id: session_id.into(),
            history: Vec::new(),
            active_module: None,
            explored_topics: BTreeSet::new(),
            explored_modules: BTreeSet::new(),
            explored_entities: BTreeSet::new(),
            surfaced_prompts: BTreeSet::new(),
            focus: FocusStack::default(),
            user_profile: UserProfile::default(),
            agent_profile,
            state_vars: BTreeMap::new(),
            rng_seed: seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            turn_count: 0,
            flow_state: BTreeMap::new(),
            modules: ModuleMemory::default(),
            pending: Pending::default(),
            next_pending: Pending::default(),
            completions: Vec::new(),
            last_reply: None,
            ended: false,
        }
    }

    /// Moves the expectations set last turn into view and clears the slot
    /// for this turn's winner.
    pub fn begin_turn(&mut self) {
        self.pending = std::mem::take(&mut self.next_pending);
    }

    pub fn active_flow(&self) -> Option<&str> {
        self.active_module.as_ref().and_then(ModuleId::flow_id)
    }

    pub fn is_active(&self, m: &ModuleId) -> bool {
        self.active_module.as_ref() == Some(m)
    }

    pub fn surfaced(&self, id: &PromptId) -> bool {
        self.surfaced_prompts.contains(id)
    }

    pub fn module_explored(&self, key: &str) -> bool {
        self.explored_modules.contains(key)
    }

    /// User utterances in order, oldest first, excluding the current turn
    /// if it was already recorded.
    pub fn user_turns(&self) -> impl Iterator<Item = &AnnotatedUtterance> {
        self.history.iter().filter_map(|h| match &h.content {
            TurnContent::User(u) => Some(u),
            _ => None,
        })
    }

    pub fn last_system_turn(&self) -> Option<&SystemTurn> {
        self.history.iter().rev().find_map(|h| match &h.content {
            TurnContent::System(s) => Some(s),
            _ => None,
        })
    }

    /// Appends a turn. User turns bump the turn count and push their
    /// entities; system turns push the entities of the reply. Within one
    /// turn the first-listed entity ends on top of the focus stack.
    pub fn record_turn(&mut self, content: TurnContent, timestamp_ms: u64) {
        let entities: Vec<EntityId> = match &content {
            TurnContent::User(u) => {
                self.turn_count += 1;
                self.user_profile.update_allowance(self.turn_count);
                u.entity_ids().cloned().collect()
            }
            TurnContent::System(s) => {
                self.last_reply = Some(s.text.clone());
                self.surfaced_prompts.insert(s.prompt_id.clone());
                s.entities.clone()
            }
        };
        for e in entities.into_iter().rev() {
            self.focus.push(e, self.turn_count);
        }
        self.history.push(HistoryEntry { content, timestamp_ms });
    }

    /// Drops focus entries whose age in user turns is at least `threshold`
    /// and appends them to the archive. Returns the dropped entries.
    pub fn flush_to_ltm(&mut self, threshold: u32, archive: &LtmArchive) -> Vec<FocusEntry> {
        let dropped = self.focus.drain_older(self.turn_count, threshold);
        for entry in &dropped {
            let record = ArchiveRecord::FocusFlushed {
                entity: entry.entity.clone(),
                last_turn: entry.last_turn,
                flushed_at: self.turn_count,
            };
            if let Err(e) = archive.append(&self.session_id, record) {
                tracing::warn!(session = %self.session_id, error = %e, "archive append failed");
            }
        }
        dropped
    }

    pub fn apply(&mut self, effect: Effect) {
        match effect {
            Effect::SetActive(m) => self.active_module = Some(m),
            Effect::Release(m) => {
                if self.active_module.as_ref() == Some(&m) {
                    self.active_module = None;
                }
            }
            Effect::SetVar(k, v) => {
                self.state_vars.insert(k, v);
            }
            Effect::ExploreTopic(t) => {
                self.explored_topics.insert(t);
            }
            Effect::ExploreModule(m) => {
                self.explored_modules.insert(m);
            }
            Effect::ExploreEntity(e) => {
                self.explored_entities.insert(e);
            }
            Effect::PushFocus(e) => self.focus.push(e, self.turn_count),
            Effect::Offer(o) => self.next_pending.offer = Some(o),
            Effect::Story(c) => self.modules.story = c,
            Effect::Loop(l) => self.modules.recursive = l,
            Effect::Intimacy(p) => self.modules.intimacy = p,
            Effect::Recommendation(r) => self.modules.recommendation = r,
            Effect::Flow { id, cursor } => match cursor {
                Some(c) => {
                    self.flow_state.insert(id.clone(), c);
                    self.active_module = Some(ModuleId::Flow(id));
                }
                None => {
                    self.flow_state.remove(&id);
                    self.explored_topics.insert(id.clone());
                    if self.active_flow() == Some(id.as_str()) {
                        self.active_module = None;
                    }
                }
            },
            Effect::AskedWellbeing => self.next_pending.wellbeing_question = true,
            Effect::AskedFeedback(m) => self.next_pending.feedback_for = Some(m),
            Effect::Completed(m) => self.completions.push(m),
            Effect::Feedback(f) => self.user_profile.feedback.push(f),
            Effect::Interest(t) => {
                self.user_profile.interests.insert(t);
            }
            Effect::Surface(p) => {
                self.surfaced_prompts.insert(p);
            }
            Effect::ResetFeedbackCounter => self.completions.clear(),
            Effect::EndSession => self.ended = true,
        }
    }

    pub fn apply_all<I: IntoIterator<Item = Effect>>(&mut self, effects: I) {
        for e in effects {
            self.apply(e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::EntityId;
    use crate::nlu::{AsrStatus, DialogueAct, EntityMention, IntentLabel};

    fn utt(entities: &[&str]) -> AnnotatedUtterance {
        AnnotatedUtterance {
            raw_text: "x".into(),
            tokens: vec!["x".into()],
            content_words: vec!["x".into()],
            intent: IntentLabel::unknown(),
            dialogue_act: DialogueAct::Statement,
            entities: entities
                .iter()
                .enumerate()
                .map(|(i, e)| EntityMention {
                    surface: e.to_string(),
                    entity_id: EntityId::from(*e),
                    span: (i, i + 1),
                    salience: 1.0,
                })
                .collect(),
            sentiment: 0.0,
            topic: None,
            profane: false,
            asr_status: AsrStatus::Accepted,
            hypotheses: vec![],
        }
    }

    fn state() -> SessionState {
        SessionState::new("s", 1, AgentProfile::default())
    }

    #[test]
    fn user_turn_pushes_focus_and_counts() {
        let mut s = state();
        s.record_turn(TurnContent::User(utt(&["paris"])), 0);
        s.record_turn(TurnContent::User(utt(&["paris"])), 0);
        assert_eq!(s.turn_count, 2);
        assert_eq!(s.focus.top().unwrap().as_str(), "paris");
        assert_eq!(s.focus.len(), 1);
    }

    #[test]
    fn system_turn_leaves_count_and_marks_prompt() {
        let mut s = state();
        s.record_turn(
            TurnContent::System(SystemTurn {
                text: "hi".into(),
                source: ModuleId::Base,
                prompt_id: PromptId::new("p"),
                entities: vec!["mexico_city".into(), "mexico".into()],
            }),
            0,
        );
        assert_eq!(s.turn_count, 0);
        assert!(s.surfaced(&PromptId::new("p")));
        assert_eq!(s.focus.top().unwrap().as_str(), "mexico_city");
    }

    #[test]
    fn flow_exit_releases_initiative() {
        let mut s = state();
        s.apply(Effect::Flow {
            id: "travel".into(),
            cursor: Some(FlowCursor { expects: vec!["a".into()], last_node: None }),
        });
        assert_eq!(s.active_flow(), Some("travel"));
        s.apply(Effect::Flow { id: "travel".into(), cursor: None });
        assert_eq!(s.active_module, None);
        assert!(s.explored_topics.contains("travel"));
    }

    #[test]
    fn offers_last_one_turn() {
        let mut s = state();
        s.apply(Effect::Offer(Offer::Story));
        s.begin_turn();
        assert_eq!(s.pending.offer, Some(Offer::Story));
        s.begin_turn();
        assert_eq!(s.pending.offer, None);
    }
}
