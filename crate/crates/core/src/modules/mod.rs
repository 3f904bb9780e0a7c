//! Candidate-producing dialogue modules.
//!
//! Every module is a function of a [`ModuleCtx`]: it reads the session and
//! the annotated turn and returns zero or more candidates. State changes
//! travel as effects on the candidates and are applied only to the winner.

pub mod base;
pub mod eliza;
pub mod intimacy;
pub mod ood;
pub mod opinions;
pub mod qa;
pub mod recommend;
pub mod recursive;
pub mod retrieval;
pub mod stories;
pub mod wellbeing;

use crate::candidate::{ModuleId, ResponseCandidate};
use crate::flow::Delegation;
use crate::kg::EntityId;
use crate::memory::SessionState;
use crate::nlu::{AnnotatedUtterance, Mood};
use crate::resources::Resources;

pub use eliza::{Eliza, ElizaRule};
pub use stories::{Story, StoryChunk, StoryKind};

/// Read-only view handed to every module.
#[derive(Clone, Copy)]
pub struct ModuleCtx<'a> {
    pub res: &'a Resources,
    pub state: &'a SessionState,
    pub utt: &'a AnnotatedUtterance,
    /// Entity a third-person pronoun in the turn refers to.
    pub focus: Option<&'a EntityId>,
    pub mood: Mood,
    /// Set when a flow node handed this turn to the module.
    pub delegation: Option<&'a Delegation>,
    /// Topic of the delegating flow.
    pub flow_topic: Option<&'a str>,
}

impl<'a> ModuleCtx<'a> {
    pub fn affirm(&self) -> bool {
        self.utt.has_intent("affirm")
    }

    pub fn deny(&self) -> bool {
        self.utt.has_intent("deny")
    }

    pub fn wants_out(&self) -> bool {
        self.utt.has_intent("request_change_topic") || self.utt.has_intent("request_exit")
    }

    pub fn delegated_to(&self, module: &str) -> bool {
        self.delegation.is_some_and(|d| d.module == module)
    }

    pub fn first_entity(&self) -> Option<&'a EntityId> {
        self.utt.entity_ids().next()
    }

    /// The mention surface of an entity in the turn, else its display name.
    pub fn surface(&self, id: &EntityId) -> String {
        self.utt
            .entities
            .iter()
            .find(|m| &m.entity_id == id)
            .map(|m| m.surface.to_lowercase())
            .unwrap_or_else(|| self.res.graph.name_of(id))
    }

    pub fn name(&self, id: &EntityId) -> String {
        self.res.graph.name_of(id)
    }
}

/// Human form of a topic or flow id.
pub fn topic_name(topic: &str) -> String {
    topic.replace('_', " ")
}

/// Topics for the menu: configured favourites first, then every other
/// flow, skipping explored ones.
pub fn menu_topics(ctx: &ModuleCtx) -> Vec<String> {
    let flows = &ctx.res.flows;
    let cfg = &ctx.res.config.dialogue;
    let ordered: Vec<String> = cfg
        .menu_topics
        .iter()
        .filter(|t| flows.get(t).is_some())
        .cloned()
        .chain(flows.iter().map(|f| f.id.clone()).filter(|id| !cfg.menu_topics.contains(id)))
        .collect();
    let fresh: Vec<String> = ordered
        .iter()
        .filter(|t| !ctx.state.explored_topics.contains(*t))
        .take(cfg.menu_size)
        .cloned()
        .collect();
    if fresh.is_empty() {
        ordered.into_iter().take(cfg.menu_size).collect()
    } else {
        fresh
    }
}

pub fn menu_text(ctx: &ModuleCtx) -> String {
    let names: Vec<String> = menu_topics(ctx).iter().map(|t| topic_name(t)).collect();
    match names.as_slice() {
        [] => "What would you like to talk about?".into(),
        [one] => format!("We could talk about {one}. What sounds good to you?"),
        [init @ .., last] => format!("We could talk about {} or {last}. What sounds good to you?", init.join(", ")),
    }
}

/// Runs every module in pool order.
pub fn propose_all(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    let mut pool = Vec::new();
    for m in POOL_ORDER {
        pool.extend(propose(m, ctx));
    }
    pool
}

/// Order in which modules contribute to the pool. Merge partners with equal
/// scores are taken in this order.
pub const POOL_ORDER: &[ModuleId] = &[
    ModuleId::Base,
    ModuleId::QuestionAnswering,
    ModuleId::Opinions,
    ModuleId::Intimacy,
    ModuleId::Retrieval,
    ModuleId::Storytelling,
    ModuleId::Recommendation,
    ModuleId::Recursive,
    ModuleId::Wellbeing,
    ModuleId::OutOfDomain,
];

/// Candidates from one module. Flows are stepped by the engine, not here.
pub fn propose(module: &ModuleId, ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    match module {
        ModuleId::Base => base::propose(ctx),
        ModuleId::Opinions => opinions::propose(ctx),
        ModuleId::QuestionAnswering => qa::propose(ctx),
        ModuleId::Wellbeing => wellbeing::propose(ctx),
        ModuleId::Intimacy => intimacy::propose(ctx),
        ModuleId::OutOfDomain => vec![ood::propose(ctx)],
        ModuleId::Retrieval => retrieval::propose(ctx),
        ModuleId::Storytelling => stories::propose(ctx),
        ModuleId::Recommendation => recommend::propose(ctx),
        ModuleId::Recursive => recursive::propose(ctx),
        ModuleId::Flow(_) => Vec::new(),
    }
}

/// Module named by a flow delegation.
pub fn delegate_target(d: &Delegation) -> Option<ModuleId> {
    match d.module.as_str() {
        "recursive" => Some(ModuleId::Recursive),
        "recommendation" => Some(ModuleId::Recommendation),
        "storytelling" => Some(ModuleId::Storytelling),
        "intimacy" => Some(ModuleId::Intimacy),
        "qa" => Some(ModuleId::QuestionAnswering),
        "opinions" => Some(ModuleId::Opinions),
        _ => None,
    }
}

/// Lowercases the first letter unless the first word is "I" or a
/// contraction of it.
pub(crate) fn decapitalize(s: &str) -> String {
    let first_word = s.split_whitespace().next().unwrap_or("");
    if first_word == "I" || first_word.starts_with("I'") {
        return s.to_string();
    }
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}
