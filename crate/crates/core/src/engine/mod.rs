//! Sessions and the per-turn pipeline.
//!
//! An [`Engine`] owns the shared resources and every live session. Turns on
//! different sessions run concurrently; turns on one session are serialized
//! by that session's lock.

mod pipeline;
mod simulate;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::candidate::{ModuleId, PromptId};
use crate::config::EngineConfig;
use crate::kg::{DiscourseRelation, EntityId};
use crate::memory::{init_agent_profile, ArchiveRecord, LtmArchive, SessionState, Speaker};
use crate::nlu::{DialogueAct, Mood, TurnInput};
use crate::postprocess::FinalReply;
use crate::ranker::{LossBreakdown, Selection};
use crate::resources::{ResourceError, Resources};

pub use simulate::{parse_script, run_script, Script, ScriptError, ScriptStep, Transcript};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("session `{0}` has ended")]
    SessionEnded(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// One pool entry as reported in the turn debug output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateDebug {
    pub source: ModuleId,
    pub text: String,
    pub prompt_id: PromptId,
    pub confidence: f64,
    pub context: f64,
    pub loss: LossBreakdown,
    pub final_confidence: f64,
    pub valid: bool,
    pub priority: bool,
    pub dialogue_act: DialogueAct,
    pub discourse_relation: Option<DiscourseRelation>,
    pub entities: Vec<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowDebug {
    pub flow: String,
    /// Node that ran; `None` when nothing matched and the flow exited.
    pub node: Option<String>,
    pub expects_before: Vec<String>,
    pub expects_after: Vec<String>,
    pub exited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnDebug {
    pub intent: String,
    pub dialogue_act: DialogueAct,
    pub topic: Option<String>,
    pub mood: Mood,
    pub focus: Option<EntityId>,
    pub pool: Vec<CandidateDebug>,
    pub winner: usize,
    pub selection: Selection,
    pub tie_size: usize,
    /// Module holding the initiative after the turn.
    pub active_module: Option<ModuleId>,
    pub flow: Option<FlowDebug>,
    pub discourse_relation: Option<DiscourseRelation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnResponse {
    pub reply: FinalReply,
    pub debug: TurnDebug,
    pub ended: bool,
}

/// Public view of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub seed: u64,
    pub turns: u32,
    pub ended: bool,
    pub active_module: Option<ModuleId>,
    pub explored_topics: Vec<String>,
    pub transcript: Vec<TranscriptLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub speaker: Speaker,
    pub text: String,
    pub timestamp_ms: u64,
}

impl From<&SessionState> for SessionInfo {
    fn from(s: &SessionState) -> Self {
        SessionInfo {
            session_id: s.session_id.clone(),
            seed: s.rng_seed,
            turns: s.turn_count,
            ended: s.ended,
            active_module: s.active_module.clone(),
            explored_topics: s.explored_topics.iter().cloned().collect(),
            transcript: s
                .history
                .iter()
                .map(|h| TranscriptLine { speaker: h.speaker(), text: h.text().to_string(), timestamp_ms: h.timestamp_ms })
                .collect(),
        }
    }
}

type SessionHandle = Arc<Mutex<SessionState>>;

pub struct Engine {
    res: Arc<Resources>,
    archive: LtmArchive,
    sessions: Mutex<BTreeMap<String, SessionHandle>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

pub(crate) fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Engine {
    pub fn new(res: Resources) -> Result<Self, EngineError> {
        let archive = match &res.config.paths.archive_dir {
            Some(dir) => LtmArchive::on_disk(res.config.data_path(dir))
                .map_err(|e| EngineError::Resource(ResourceError::Memory(e)))?,
            None => LtmArchive::in_memory(),
        };
        Ok(Engine { res: Arc::new(res), archive, sessions: Mutex::default() })
    }

    pub fn from_config(config: EngineConfig) -> Result<Self, EngineError> {
        Self::new(Resources::load(config)?)
    }

    /// Engine over the bundled data with default settings.
    pub fn bundled() -> Result<Self, EngineError> {
        Self::from_config(EngineConfig::default())
    }

    pub fn resources(&self) -> &Resources {
        &self.res
    }

    pub fn archive(&self) -> &LtmArchive {
        &self.archive
    }

    /// Creates a session. The seed comes from the argument, else the config,
    /// else the system generator.
    pub fn create_session(&self, seed: Option<u64>) -> Result<SessionInfo, EngineError> {
        let id = uuid::Uuid::new_v4().to_string();
        self.create_session_with_id(id, seed)
    }

    /// Creates a session under a caller-chosen id, replacing any session
    /// with the same id.
    pub fn create_session_with_id(&self, id: impl Into<String>, seed: Option<u64>) -> Result<SessionInfo, EngineError> {
        let id = id.into();
        let seed = seed.or(self.res.config.session.seed).unwrap_or_else(rand::random);
        let profile = init_agent_profile(&self.res.opinions, seed)
            .map_err(|e| EngineError::Resource(ResourceError::Memory(e)))?;
        let mut state = SessionState::new(id.clone(), seed, profile);
        state.user_profile.intimacy_period = self.res.config.memory.intimacy_period;
        let info = SessionInfo::from(&state);
        lock(&self.sessions).insert(id, Arc::new(Mutex::new(state)));
        Ok(info)
    }

    fn handle(&self, id: &str) -> Result<SessionHandle, EngineError> {
        lock(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| EngineError::UnknownSession(id.to_string()))
    }

    pub fn session_info(&self, id: &str) -> Result<SessionInfo, EngineError> {
        let handle = self.handle(id)?;
        let state = lock(&handle);
        Ok(SessionInfo::from(&*state))
    }

    /// A copy of the full session state.
    pub fn snapshot(&self, id: &str) -> Result<SessionState, EngineError> {
        let handle = self.handle(id)?;
        let state = lock(&handle);
        Ok(state.clone())
    }

    /// Forgets a session entirely.
    pub fn remove_session(&self, id: &str) -> bool {
        lock(&self.sessions).remove(id).is_some()
    }

    pub fn session_count(&self) -> usize {
        lock(&self.sessions).len()
    }

    /// Ends a session and archives its summary. The session stays readable
    /// but accepts no more turns.
    pub fn end_session(&self, id: &str) -> Result<SessionInfo, EngineError> {
        let handle = self.handle(id)?;
        let mut state = lock(&handle);
        if !state.ended {
            state.ended = true;
            self.archive_summary(&state);
        }
        Ok(SessionInfo::from(&*state))
    }

    pub fn handle_turn(&self, id: &str, input: &TurnInput) -> Result<TurnResponse, EngineError> {
        let handle = self.handle(id)?;
        let mut state = lock(&handle);
        let response = pipeline::run_turn(&self.res, &mut state, input, &self.archive)?;
        if response.ended {
            self.archive_summary(&state);
        }
        Ok(response)
    }

    pub fn say(&self, id: &str, text: &str) -> Result<TurnResponse, EngineError> {
        self.handle_turn(id, &TurnInput::text(text))
    }

    fn archive_summary(&self, state: &SessionState) {
        let record = ArchiveRecord::SessionSummary {
            turns: state.turn_count,
            explored_topics: state.explored_topics.iter().cloned().collect(),
            explored_modules: state.explored_modules.iter().cloned().collect(),
        };
        if let Err(e) = self.archive.append(&state.session_id, record) {
            tracing::warn!(session = %state.session_id, error = %e, "session summary not archived");
        }
    }
}
