//! Content packs, ingestion-time quality filters, an embedded TF-IDF index
//! and the ordered search-provider cascade.

mod index;
mod ingest;
mod provider;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::kg::{DiscourseRelation, EntityId};
use crate::nlu::DialogueAct;

pub use index::{ContentIndex, RetrievalQuery, ScoredItem};
pub use ingest::{ingest, ingest_file, FilterConfig, IngestReport, Rejection, RejectRule};
pub use provider::{
    search_provider_cascade, Answer, CascadeOutcome, OfflineProvider, ProviderError, SearchProvider,
};

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("{path}: {msg}")]
    Resource { path: PathBuf, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentKind {
    Fact,
    Trivia,
    Joke,
    Riddle,
    WouldYouRather,
    Hypothetical,
    IntimacyQuestion,
    DialogueTurn,
    NewsHeadline,
    Opinion,
    StoryChunk,
}

impl ContentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ContentKind::Fact => "fact",
            ContentKind::Trivia => "trivia",
            ContentKind::Joke => "joke",
            ContentKind::Riddle => "riddle",
            ContentKind::WouldYouRather => "would_you_rather",
            ContentKind::Hypothetical => "hypothetical",
            ContentKind::IntimacyQuestion => "intimacy_question",
            ContentKind::DialogueTurn => "dialogue_turn",
            ContentKind::NewsHeadline => "news_headline",
            ContentKind::Opinion => "opinion",
            ContentKind::StoryChunk => "story_chunk",
        }
    }
}

impl fmt::Display for ContentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One indexed utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentItem {
    pub id: String,
    pub text: String,
    pub kind: ContentKind,
    pub topic: String,
    #[serde(default)]
    pub entities: Vec<EntityId>,
    pub dialogue_act: DialogueAct,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discourse_relation: Option<DiscourseRelation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intimacy_level: Option<u32>,
    pub safe: bool,
    pub source: String,
    /// The agent's own answer for two-turn sequence items.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_answer: Option<String>,
}
