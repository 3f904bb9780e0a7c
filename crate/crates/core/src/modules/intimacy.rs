//! Personal questions filtered by intimacy level, plus interest probes on
//! entities the user brings up.

use super::{topic_name, ModuleCtx};
use crate::candidate::{MergeRole, ModuleId, PromptId, ResponseCandidate};
use crate::memory::{Effect, IntimacyPhase, Offer, Scalar, SessionState};
use crate::nlu::Mood;
use crate::resources::Resources;
use crate::retrieval::{ContentItem, ContentKind};

use super::base::LAST_ENGAGEMENT;

pub fn prompt_for(item: &ContentItem) -> PromptId {
    PromptId::new(format!("intimacy:{}", item.id))
}

/// Lowest-level unsurfaced question within the user's allowance, ties by id.
pub fn next_question<'a>(res: &'a Resources, state: &SessionState) -> Option<&'a ContentItem> {
    if matches!(state.user_profile.mood, Mood::Offended | Mood::Hostile) {
        return None;
    }
    let allowance = state.user_profile.intimacy_allowance;
    res.index
        .items()
        .filter(|i| i.kind == ContentKind::IntimacyQuestion)
        .filter(|i| i.intimacy_level.is_some_and(|l| l <= allowance))
        .filter(|i| !state.surfaced(&prompt_for(i)))
        .min_by(|a, b| (a.intimacy_level, &a.id).cmp(&(b.intimacy_level, &b.id)))
}

fn cand(text: impl Into<String>, conf: f64) -> ResponseCandidate {
    ResponseCandidate::new(ModuleId::Intimacy, text, conf)
}

/// Candidate asking `item`, taking the initiative.
pub fn ask(item: &ContentItem, conf: f64) -> ResponseCandidate {
    cand(item.text.clone(), conf)
        .prompt(prompt_for(item).0)
        .topic(item.topic.clone())
        .role(MergeRole::Question)
        .with_effects([
            Effect::Intimacy(IntimacyPhase::Awaiting(item.id.clone())),
            Effect::SetActive(ModuleId::Intimacy),
            Effect::ExploreModule("intimacy".into()),
        ])
}

fn finish() -> Vec<Effect> {
    vec![
        Effect::Intimacy(IntimacyPhase::Idle),
        Effect::Release(ModuleId::Intimacy),
        Effect::Completed(ModuleId::Intimacy),
        Effect::SetVar(LAST_ENGAGEMENT.into(), Scalar::Text("a few personal questions".into())),
    ]
}

pub fn propose(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    if matches!(ctx.mood, Mood::Offended | Mood::Hostile) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let state = ctx.state;
    let active = state.is_active(&ModuleId::Intimacy);
    match (&state.modules.intimacy, active) {
        (IntimacyPhase::Awaiting(id), true) if !ctx.wants_out() => {
            if let Some(item) = ctx.res.index.get(id) {
                out.push(react(ctx, item));
            }
        }
        (IntimacyPhase::Reoffered, true) if !ctx.wants_out() => {
            if ctx.affirm() {
                match next_question(ctx.res, state) {
                    Some(item) => out.push(ask(item, 1.0)),
                    None => out.push(
                        cand("Actually, I've run out of questions for now. Thanks for sharing with me!", 1.0)
                            .with_effects(finish()),
                    ),
                }
            } else if ctx.deny() {
                out.push(cand("No problem, I'll stop with the personal questions.", 1.0).with_effects(finish()));
            }
        }
        _ => {}
    }
    let accepted = ctx.affirm() && state.pending.offer == Some(Offer::Intimacy);
    if out.is_empty() && (accepted || ctx.delegated_to("intimacy")) {
        if let Some(item) = next_question(ctx.res, state) {
            out.push(ask(item, 1.0));
        }
    }
    if ctx.utt.has_intent("request_discuss_topic") {
        if let Some(id) = ctx.first_entity() {
            let prompt = format!("intimacy:interest:{id}");
            if !state.surfaced(&PromptId::new(prompt.clone())) {
                out.push(
                    cand(format!("Why are you interested in {}?", ctx.surface(id)), 0.6)
                        .prompt(prompt)
                        .role(MergeRole::Question)
                        .entities([id.clone()])
                        .maybe_topic(ctx.utt.topic.clone()),
                );
            }
        }
    }
    out
}

/// Reaction to the user's answer: the agent's own answer and a re-offer, or
/// a gentle topic probe when the user declines.
fn react(ctx: &ModuleCtx, item: &ContentItem) -> ResponseCandidate {
    if ctx.deny() {
        let topic = topic_name(&item.topic);
        let mut c = cand(format!("Okay, are you interested at all in {topic}?"), 1.0)
            .topic(item.topic.clone())
            .with_effects(finish());
        if ctx.res.flows.get(&item.topic).is_some() {
            c = c.effect(Effect::Offer(Offer::Flow(item.topic.clone())));
        }
        return c;
    }
    let answer = item.agent_answer.as_deref().unwrap_or("I'm still figuring that one out myself.");
    cand(
        format!("I see, for me personally you might ask? {answer} Would you be okay answering another question?"),
        1.0,
    )
    .topic(item.topic.clone())
    .prompt(format!("intimacy:{}:answer", item.id))
    .effect(Effect::Intimacy(IntimacyPhase::Reoffered))
}
