//! Reacts to the user's mood and to answers about their day.

use super::{menu_topics, topic_name, ModuleCtx};
use crate::candidate::{ModuleId, ResponseCandidate};
use crate::memory::{Effect, IntimacyPhase, Offer};
use crate::nlu::{DialogueAct, Mood};

pub const DAY_QUESTION: &str = "How is your day going?";

fn cand(text: impl Into<String>, conf: f64) -> ResponseCandidate {
    ResponseCandidate::new(ModuleId::Wellbeing, text, conf)
}

pub fn propose(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    let u = ctx.utt;
    if ctx.state.pending.wellbeing_question {
        let text = if u.sentiment > 0.25 || ctx.affirm() {
            "That's great to hear! I'm glad your day is going well."
        } else if u.sentiment < -0.25 || ctx.deny() {
            "I'm sorry to hear that. I hope the rest of your day gets better."
        } else {
            "Thanks for telling me about it."
        };
        let with_menu = format!("{text} {}", super::menu_text(ctx));
        return vec![cand(with_menu, 1.0).prompt("wellbeing:answer").menu().effect(Effect::ExploreModule("wellbeing".into()))];
    }
    match ctx.mood {
        Mood::Bored => vec![cand(
            "Let's switch things up. You can ask me to tell you a story, or I can share a fun science fact.",
            0.9,
        )
        .act(DialogueAct::Statement)
        .prompt("wellbeing:bored")
        .menu()],
        Mood::Offended | Mood::Hostile => {
            let topic = menu_topics(ctx).into_iter().next();
            let mut text = "I'm sorry, I didn't mean to upset you. Let's talk about something else.".to_string();
            let mut c_effects = vec![Effect::Intimacy(IntimacyPhase::Idle)];
            if let Some(active) = ctx.state.active_module.clone() {
                c_effects.push(Effect::Release(active));
            }
            if let Some(t) = &topic {
                text.push_str(&format!(" How about {}?", topic_name(t)));
                c_effects.push(Effect::Offer(Offer::Flow(t.clone())));
            }
            vec![cand(text, 1.0).prompt("wellbeing:apology").menu().with_effects(c_effects)]
        }
        Mood::Negative => vec![cand("I'm sorry you're feeling down. Would you like to hear a story? It might cheer you up.", 0.85)
            .prompt("wellbeing:uplift")
            .menu()
            .effect(Effect::Offer(Offer::Story))],
        Mood::Positive => vec![cand("I'm glad you're in a good mood!", 0.3).prompt("wellbeing:positive").menu()],
        Mood::Neutral => Vec::new(),
    }
}
