//! Chunked stories told one pausing point at a time.
//!
//! A story opens with its intro. Every chunk ends with a tag question so the
//! user is steered toward a yes or no rather than an open question.
//! Questions during a story are answered from its `qa_pairs` by the QA
//! module.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::base::LAST_ENGAGEMENT;
use super::ModuleCtx;
use crate::candidate::{MergeRole, ModuleId, ResponseCandidate};
use crate::memory::{Effect, Offer, Scalar, StoryCursor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoryKind {
    Fable,
    Dream,
    Adventure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoryChunk {
    pub text: String,
    pub tag_question: String,
    /// Text with inline speech markers; used instead of `text` when present.
    #[serde(default)]
    pub ssml: Option<String>,
}

impl StoryChunk {
    pub fn spoken(&self) -> String {
        format!("{} {}", self.ssml.as_deref().unwrap_or(&self.text), self.tag_question)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Story {
    pub id: String,
    pub title: String,
    pub kind: StoryKind,
    pub intro: String,
    pub chunks: Vec<StoryChunk>,
    /// Case-insensitive pattern over the question, mapped to the answer.
    #[serde(default)]
    pub qa_pairs: BTreeMap<String, String>,
    #[serde(skip)]
    compiled: Vec<(Regex, String)>,
}

impl Story {
    pub fn from_json(body: &str) -> Result<Self, String> {
        let mut story: Story = serde_json::from_str(body).map_err(|e| e.to_string())?;
        if story.chunks.is_empty() {
            return Err(format!("story `{}` has no chunks", story.id));
        }
        if let Some(i) = story.chunks.iter().position(|c| c.tag_question.trim().is_empty()) {
            return Err(format!("story `{}` chunk {i} has no tag question", story.id));
        }
        story.compiled = story
            .qa_pairs
            .iter()
            .map(|(p, a)| {
                Regex::new(&format!("(?i){p}"))
                    .map(|r| (r, a.clone()))
                    .map_err(|e| format!("story `{}` pattern `{p}`: {e}", story.id))
            })
            .collect::<Result<_, _>>()?;
        Ok(story)
    }

    /// Every `*.json` story in `dir`, sorted by id.
    pub fn load_dir(dir: &Path) -> Result<Vec<Story>, String> {
        let mut out = Vec::new();
        let listing = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        for entry in listing.flatten() {
            let path = entry.path();
            if path.extension().is_some_and(|x| x == "json") {
                let body = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                out.push(Story::from_json(&body).map_err(|e| format!("{}: {e}", path.display()))?);
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    /// Structured answer to a question about the story.
    pub fn answer(&self, question: &str) -> Option<&str> {
        self.compiled
            .iter()
            .find(|(r, _)| r.is_match(question))
            .map(|(_, a)| a.as_str())
    }
}

fn cand(text: impl Into<String>, conf: f64) -> ResponseCandidate {
    ResponseCandidate::new(ModuleId::Storytelling, text, conf)
}

fn explored_key(id: &str) -> String {
    format!("story:{id}")
}

/// First story not yet told this session.
pub fn next_story<'a>(ctx: &ModuleCtx<'a>) -> Option<&'a Story> {
    ctx.res.stories.iter().find(|s| !ctx.state.module_explored(&explored_key(&s.id)))
}

pub fn active_story<'a>(ctx: &ModuleCtx<'a>) -> Option<(&'a Story, &'a StoryCursor)> {
    let cursor = ctx.state.modules.story.as_ref()?;
    let story = ctx.res.stories.iter().find(|s| s.id == cursor.story_id)?;
    Some((story, cursor))
}

pub fn requested(ctx: &ModuleCtx) -> bool {
    let u = ctx.utt;
    let asked = u.mentions("story") || u.mentions("stories");
    let accepted = ctx.affirm() && ctx.state.pending.offer == Some(Offer::Story);
    (asked && !ctx.deny()) || accepted || ctx.delegated_to("storytelling")
}

fn start(story: &Story) -> ResponseCandidate {
    cand(story.intro.clone(), 1.0)
        .prompt(format!("story:{}:intro", story.id))
        .role(MergeRole::Question)
        .topic("stories")
        .with_effects([
            Effect::Story(Some(StoryCursor { story_id: story.id.clone(), next_chunk: 0 })),
            Effect::SetActive(ModuleId::Storytelling),
            Effect::ExploreModule(explored_key(&story.id)),
        ])
}

fn finish() -> Vec<Effect> {
    vec![
        Effect::Story(None),
        Effect::Release(ModuleId::Storytelling),
        Effect::Completed(ModuleId::Storytelling),
        Effect::SetVar(LAST_ENGAGEMENT.into(), Scalar::Text("one of my stories".into())),
    ]
}

pub fn propose(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    let active = ctx.state.is_active(&ModuleId::Storytelling);
    if let (true, Some((story, cursor))) = (active, active_story(ctx)) {
        return continue_story(ctx, story, cursor).into_iter().collect();
    }
    if requested(ctx) {
        return match next_story(ctx) {
            Some(story) => vec![start(story)],
            None => vec![cand("I'm all out of stories for today, but I'd love to hear one of yours!", 0.9)],
        };
    }
    Vec::new()
}

fn continue_story(ctx: &ModuleCtx, story: &Story, cursor: &StoryCursor) -> Option<ResponseCandidate> {
    if ctx.utt.is_question() || ctx.wants_out() {
        return None;
    }
    if ctx.deny() {
        return Some(cand("Okay, maybe I'll finish it another time.", 1.0).prompt("story:stop").with_effects(finish()));
    }
    match story.chunks.get(cursor.next_chunk) {
        Some(chunk) => Some(
            cand(chunk.spoken(), 1.0)
                .prompt(format!("story:{}:{}", story.id, cursor.next_chunk))
                .role(MergeRole::Question)
                .topic("stories")
                .effect(Effect::Story(Some(StoryCursor {
                    story_id: story.id.clone(),
                    next_chunk: cursor.next_chunk + 1,
                }))),
        ),
        None => Some(
            cand(format!("And that's the end of {}. Thanks for listening!", story.title), 1.0)
                .prompt(format!("story:{}:end", story.id))
                .with_effects(finish()),
        ),
    }
}
