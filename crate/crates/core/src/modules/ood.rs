//! Out-of-domain fallback. Always proposes exactly one low-confidence
//! candidate, which the ranker substitutes when nothing else is confident.

use std::time::Duration;

use super::intimacy;
use super::recursive::{offer_text, DEFAULT_FACT_TOPIC};
use super::stories::next_story;
use super::wellbeing::DAY_QUESTION;
use super::{menu_text, ModuleCtx};
use crate::candidate::{ModuleId, ResponseCandidate};
use crate::kg::EntityId;
use crate::memory::{Effect, LoopKind, Offer};
use crate::retrieval::search_provider_cascade;

pub const CONFIDENCE: f64 = 0.5;
pub const APOLOGY: &str = "I'm really sorry about this, but I'm not sure what to say next. My robot brain is telling \
                           me I'm not quite sure how to respond to what you just said. Do you mind if I switch to a new topic?";
/// Topic of the would-you-rather offer.
const SEQUENCE_TOPIC: &str = "books";

fn cand(text: impl Into<String>) -> ResponseCandidate {
    ResponseCandidate::new(ModuleId::OutOfDomain, text, CONFIDENCE)
}

pub fn propose(ctx: &ModuleCtx) -> ResponseCandidate {
    if let Some(id) = ctx.first_entity() {
        if !ctx.state.explored_entities.contains(id) {
            return about_entity(ctx, id);
        }
    }
    let turn = ctx.state.turn_count;
    let menu_after = ctx.res.config.dialogue.ood_menu_after;
    if ctx.state.modules.consecutive_ood + 1 >= menu_after.max(1) {
        return cand(format!("{APOLOGY} {}", menu_text(ctx)))
            .prompt(format!("ood:menu:{turn}"))
            .menu();
    }
    let (follow, key, effects) = follow_up(ctx);
    cand(format!("{APOLOGY} {follow}"))
        .prompt(format!("ood:{key}:{turn}"))
        .with_effects(effects)
}

/// The first follow-up not yet used this session.
fn follow_up(ctx: &ModuleCtx) -> (String, &'static str, Vec<Effect>) {
    let state = ctx.state;
    if !state.module_explored("wellbeing") {
        return (
            DAY_QUESTION.to_string(),
            "wellbeing",
            vec![Effect::AskedWellbeing, Effect::ExploreModule("wellbeing".into())],
        );
    }
    if !state.module_explored("intimacy") {
        if let Some(item) = intimacy::next_question(ctx.res, state) {
            let asked = intimacy::ask(item, CONFIDENCE);
            return (asked.text, "intimacy", asked.effects);
        }
    }
    if !state.module_explored("offer:story") && next_story(ctx).is_some() {
        return (
            "Would you like to hear a story?".into(),
            "story",
            vec![Effect::Offer(Offer::Story), Effect::ExploreModule("offer:story".into())],
        );
    }
    if !state.module_explored("offer:facts") {
        return (
            offer_text(LoopKind::Facts, DEFAULT_FACT_TOPIC),
            "facts",
            vec![
                Effect::Offer(Offer::Facts(DEFAULT_FACT_TOPIC.into())),
                Effect::ExploreModule("offer:facts".into()),
            ],
        );
    }
    if !state.module_explored("offer:sequence") {
        return (
            offer_text(LoopKind::WouldYouRather, SEQUENCE_TOPIC),
            "sequence",
            vec![
                Effect::Offer(Offer::Sequence(LoopKind::WouldYouRather, SEQUENCE_TOPIC.into())),
                Effect::ExploreModule("offer:sequence".into()),
            ],
        );
    }
    (menu_text(ctx), "menu", Vec::new())
}

/// Something to say about an entity no module picked up.
fn about_entity(ctx: &ModuleCtx, id: &EntityId) -> ResponseCandidate {
    let surface = ctx.surface(id);
    let name = ctx.name(id);
    let bare = ctx.res.graph.entity(id).map(|e| e.bare_name().to_lowercase()).unwrap_or_default();
    let text = if let Some(o) = ctx.state.agent_profile.opinion(id.as_str()) {
        format!("{} What do you think about {surface}?", o.text)
    } else if !bare.is_empty() && surface.trim_start_matches("the ") != bare {
        // The user used an alias; check we understood.
        format!("Are you talking about {name}?")
    } else {
        let timeout = Duration::from_millis(ctx.res.config.providers.timeout_ms);
        match search_provider_cascade(&format!("tell me about {name}"), &ctx.res.providers, timeout).answer {
            Some(a) => format!("{} What do you think about {surface}?", a.text),
            None => format!("I don't know much about {surface} yet. What do you find interesting about it?"),
        }
    };
    cand(text)
        .entities([id.clone()])
        .prompt(format!("ood:entity:{id}"))
        .effect(Effect::ExploreEntity(id.clone()))
}
