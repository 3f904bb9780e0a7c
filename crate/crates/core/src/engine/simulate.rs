//! Scripted conversations for regression runs.
//!
//! A script is plain text, one directive per line:
//!
//! ```text
//! # comment
//! user: i want to talk about travel
//! expect: trips
//! expect_module: flow:travel
//! asr: 0.35 play some music | 0.2 pay some music
//! ```
//!
//! `expect` checks that the previous reply contains the text, ignoring case.
//! `expect_module` checks the module that produced it.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Engine, EngineError, TurnDebug};
use crate::candidate::ModuleId;
use crate::nlu::{AsrHypothesis, TurnInput};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ScriptStep {
    Say(TurnInput),
    Expect(String),
    ExpectModule(ModuleId),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Script {
    pub name: String,
    pub steps: Vec<ScriptStep>,
}

#[derive(Debug, thiserror::Error)]
#[error("{name}:{line}: {msg}")]
pub struct ScriptError {
    pub name: String,
    pub line: usize,
    pub msg: String,
}

fn parse_asr(spec: &str) -> Result<Vec<AsrHypothesis>, String> {
    spec.split('|')
        .map(|h| {
            let h = h.trim();
            let (score, text) = h.split_once(' ').ok_or_else(|| format!("hypothesis `{h}` needs a score and text"))?;
            let score: f64 = score.parse().map_err(|_| format!("bad score `{score}`"))?;
            Ok(AsrHypothesis { text: text.trim().to_string(), score })
        })
        .collect()
}

pub fn parse_script(name: &str, body: &str) -> Result<Script, ScriptError> {
    let mut steps = Vec::new();
    for (n, raw) in body.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| ScriptError { name: name.to_string(), line: n + 1, msg };
        let (key, value) = line.split_once(':').ok_or_else(|| err(format!("expected `key: value`, got `{line}`")))?;
        let value = value.trim();
        let step = match key.trim() {
            "user" => ScriptStep::Say(TurnInput::text(value)),
            "asr" => ScriptStep::Say(TurnInput { text: None, asr_hypotheses: Some(parse_asr(value).map_err(err)?) }),
            "expect" => ScriptStep::Expect(value.to_lowercase()),
            "expect_module" => ScriptStep::ExpectModule(value.parse().map_err(|e| err(format!("{e}")))?),
            other => return Err(err(format!("unknown directive `{other}`"))),
        };
        steps.push(step);
    }
    Ok(Script { name: name.to_string(), steps })
}

/// Result of running one script.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub name: String,
    pub lines: Vec<String>,
    /// Expectations that did not hold, with the turn they refer to.
    pub failures: Vec<String>,
    /// Debug output of every answered turn, in order.
    pub debug: Vec<TurnDebug>,
}

impl Transcript {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = format!("== {}\n", self.name);
        for l in &self.lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }
}

/// Runs a script in a fresh session seeded with `seed`. The session is
/// removed afterwards.
pub fn run_script(engine: &Engine, script: &Script, seed: u64) -> Result<Transcript, EngineError> {
    let session = format!("sim:{}", script.name);
    engine.create_session_with_id(session.clone(), Some(seed))?;
    let mut t = Transcript { name: script.name.clone(), ..Default::default() };
    let mut last: Option<(String, ModuleId)> = None;
    let mut turn = 0usize;
    for step in &script.steps {
        match step {
            ScriptStep::Say(input) => {
                turn += 1;
                let shown = input.text.clone().unwrap_or_else(|| {
                    input
                        .asr_hypotheses
                        .iter()
                        .flatten()
                        .map(|h| format!("{} ({})", h.text, h.score))
                        .collect::<Vec<_>>()
                        .join(" | ")
                });
                t.lines.push(format!("USER: {shown}"));
                match engine.handle_turn(&session, input) {
                    Ok(r) => {
                        let source = r.debug.pool[r.debug.winner].source.clone();
                        t.lines.push(format!("BOT [{source}]: {}", r.reply.display_text));
                        last = Some((r.reply.display_text, source));
                        t.debug.push(r.debug);
                    }
                    Err(e @ (EngineError::Input(_) | EngineError::SessionEnded(_))) => {
                        t.lines.push(format!("ERROR: {e}"));
                        last = None;
                    }
                    Err(e) => return Err(e),
                }
            }
            ScriptStep::Expect(want) => match &last {
                Some((text, _)) if text.to_lowercase().contains(want) => {}
                Some((text, _)) => t.failures.push(format!("turn {turn}: expected `{want}` in `{text}`")),
                None => t.failures.push(format!("turn {turn}: expected `{want}` but there was no reply")),
            },
            ScriptStep::ExpectModule(want) => match &last {
                Some((_, got)) if got == want => {}
                Some((_, got)) => t.failures.push(format!("turn {turn}: expected module {want}, got {got}")),
                None => t.failures.push(format!("turn {turn}: expected module {want} but there was no reply")),
            },
        }
    }
    engine.remove_session(&session);
    Ok(t)
}
