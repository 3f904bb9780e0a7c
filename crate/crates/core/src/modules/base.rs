//! Basic dialogue-manager replies: stop, repeat, menu, greeting and the
//! feedback exchange.
//!
//! Stop, repeat, clarification, menu and feedback answers are priority
//! candidates and bypass scoring.

use super::{menu_text, ModuleCtx};
use crate::candidate::{MergeRole, ModuleId, ResponseCandidate};
use crate::memory::{Effect, FeedbackEntry, Scalar};
use crate::nlu::DialogueAct;

pub const RANK_CLARIFY: u8 = 100;
pub const RANK_EXIT: u8 = 90;
pub const RANK_REPEAT: u8 = 80;
pub const RANK_FEEDBACK: u8 = 70;
pub const RANK_MENU: u8 = 60;

pub const FAREWELL: &str = "It was really nice talking with you. Goodbye!";
pub const FEEDBACK_REGRET: &str =
    "I see. I'm bummed you didn't have fun. I'll remember this for the future so that we have more fun next time.";
pub const FEEDBACK_GLAD: &str = "Awesome, I'm glad you had fun! I'll remember that for next time.";

/// State variable holding a description of the last finished engagement.
pub const LAST_ENGAGEMENT: &str = "last_engagement";

fn base(text: impl Into<String>, confidence: f64) -> ResponseCandidate {
    ResponseCandidate::new(ModuleId::Base, text, confidence)
}

/// Reply for a turn whose recognition confidence was too low.
pub fn clarification() -> ResponseCandidate {
    base("Sorry, I didn't quite catch that. Could you say that again?", 1.0)
        .priority(RANK_CLARIFY)
        .prompt("base:clarify")
        .menu()
}

pub fn propose(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    let u = ctx.utt;
    let state = ctx.state;
    let mut out = Vec::new();

    if u.has_intent("request_exit") {
        out.push(base(FAREWELL, 1.0).priority(RANK_EXIT).prompt("base:exit").effect(Effect::EndSession));
    }
    if u.has_intent("request_repeat") {
        match (&state.last_reply, state.last_system_turn()) {
            (Some(text), Some(last)) => out.push(
                base(text.clone(), 1.0)
                    .priority(RANK_REPEAT)
                    .prompt(last.prompt_id.as_str())
                    .entities(last.entities.clone())
                    .menu(),
            ),
            _ => out.push(base("I haven't said anything yet! What would you like to talk about?", 1.0).priority(RANK_REPEAT).menu()),
        }
    }
    if let Some(module) = &state.pending.feedback_for {
        let entry = |liked| Effect::Feedback(FeedbackEntry { module: module.clone(), liked });
        if ctx.deny() {
            out.push(base(FEEDBACK_REGRET, 1.0).priority(RANK_FEEDBACK).prompt("base:feedback:no").effect(entry(false)));
        } else if ctx.affirm() {
            out.push(base(FEEDBACK_GLAD, 1.0).priority(RANK_FEEDBACK).prompt("base:feedback:yes").effect(entry(true)));
        }
    }
    if u.has_intent("request_menu") {
        out.push(base(menu_text(ctx), 1.0).priority(RANK_MENU).prompt("base:menu").menu());
    }
    if u.dialogue_act == DialogueAct::Greeting {
        let conf = if state.turn_count <= 1 { 1.0 } else { 0.9 };
        let text = format!("Hi there! It's nice to chat with you. {}", menu_text(ctx));
        out.push(base(text, conf).prompt("base:greeting").menu().role(MergeRole::None));
    }
    if let Some(c) = solicit_feedback(ctx) {
        out.push(c);
    }
    out
}

/// Asks how the last engagements went once enough of them have finished
/// and nothing is driving the conversation.
fn solicit_feedback(ctx: &ModuleCtx) -> Option<ResponseCandidate> {
    let state = ctx.state;
    if state.completions.len() < ctx.res.config.dialogue.feedback_period
        || state.pending.feedback_for.is_some()
        || state.active_module.as_ref().is_some_and(ModuleId::is_system_initiative)
    {
        return None;
    }
    let last = state.completions.last()?.clone();
    let desc = state
        .state_vars
        .get(LAST_ENGAGEMENT)
        .and_then(Scalar::as_str)
        .map(str::to_string)
        .unwrap_or_else(|| last.describe());
    let text = format!(
        "So anyways, we just talked about {desc}. If you don't mind me asking, did you have fun talking about it? \
         Would you like to do it again some time in the future?"
    );
    Some(
        base(text, 0.95)
            .prompt(format!("base:feedback:{}", state.turn_count))
            .with_effects([Effect::AskedFeedback(last), Effect::ResetFeedbackCounter]),
    )
}
