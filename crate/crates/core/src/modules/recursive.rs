//! Repeating content loops: fact after fact, or two-turn sequences where the
//! system poses a question, hears the answer and gives its own.

use super::base::LAST_ENGAGEMENT;
use super::{menu_text, topic_name, ModuleCtx};
use crate::candidate::{MergeRole, ModuleId, PromptId, ResponseCandidate};
use crate::memory::{Effect, LoopKind, Offer, RecursiveLoop, Scalar, SessionState};
use crate::nlu::DialogueAct;
use crate::resources::Resources;
use crate::retrieval::{ContentItem, ContentKind};

/// Topic used for fact loops started without one.
pub const DEFAULT_FACT_TOPIC: &str = "science";
const SEQUENCE_KINDS: &[LoopKind] = &[LoopKind::WouldYouRather, LoopKind::Riddle, LoopKind::Hypothetical];

pub fn prompt_for(item: &ContentItem) -> PromptId {
    PromptId::new(format!("recursive:{}", item.id))
}

fn content_kinds(kind: LoopKind) -> &'static [ContentKind] {
    match kind {
        LoopKind::Facts => &[ContentKind::Fact, ContentKind::Trivia],
        LoopKind::News => &[ContentKind::NewsHeadline],
        LoopKind::Riddle => &[ContentKind::Riddle],
        LoopKind::WouldYouRather => &[ContentKind::WouldYouRather],
        LoopKind::Hypothetical => &[ContentKind::Hypothetical],
    }
}

fn loop_kind_of(kind: ContentKind) -> Option<LoopKind> {
    Some(match kind {
        ContentKind::Fact | ContentKind::Trivia => LoopKind::Facts,
        ContentKind::NewsHeadline => LoopKind::News,
        ContentKind::Riddle => LoopKind::Riddle,
        ContentKind::WouldYouRather => LoopKind::WouldYouRather,
        ContentKind::Hypothetical => LoopKind::Hypothetical,
        _ => return None,
    })
}

/// Parses a delegation kind such as `would_you_rather`.
pub fn parse_kind(s: &str) -> Option<LoopKind> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
}

/// Unsurfaced item of one of `kinds` in `topic`, lowest id first.
pub fn next_item<'a>(
    res: &'a Resources,
    state: &SessionState,
    kinds: &[LoopKind],
    topic: &str,
) -> Option<&'a ContentItem> {
    res.index
        .items()
        .filter(|i| i.topic == topic)
        .filter(|i| kinds.iter().any(|k| content_kinds(*k).contains(&i.kind)))
        .filter(|i| !state.surfaced(&prompt_for(i)))
        .min_by(|a, b| a.id.cmp(&b.id))
}

/// Sentence offering a loop, used by other modules to make the offer.
pub fn offer_text(kind: LoopKind, topic: &str) -> String {
    match kind {
        LoopKind::Facts => format!("Do you want to hear some {} facts?", topic_name(topic)),
        LoopKind::News => "Do you want to hear some news headlines?".into(),
        other => format!("How about I ask you some {}?", other.describe()),
    }
}

fn cand(text: impl Into<String>, conf: f64) -> ResponseCandidate {
    ResponseCandidate::new(ModuleId::Recursive, text, conf)
}

/// Candidate presenting `item` as the next loop step.
fn present(item: &ContentItem, first: bool, conf: f64) -> Option<ResponseCandidate> {
    let kind = loop_kind_of(item.kind)?;
    let (text, awaiting, role) = if kind.is_sequence() {
        (item.text.clone(), Some(item.id.clone()), MergeRole::Question)
    } else if first {
        (format!("Did you know that {} Want to hear another?", item.text), None, MergeRole::Statement)
    } else {
        (format!("How about this one. {} Want to hear more?", item.text), None, MergeRole::Statement)
    };
    Some(
        cand(text, conf)
            .prompt(prompt_for(item).0)
            .topic(item.topic.clone())
            .entities(item.entities.clone())
            .role(role)
            .with_effects([
                Effect::Loop(Some(RecursiveLoop { kind, topic: item.topic.clone(), awaiting })),
                Effect::SetActive(ModuleId::Recursive),
                Effect::ExploreModule(format!("recursive:{}", kind.describe())),
            ]),
    )
}

fn finish(kind: LoopKind) -> Vec<Effect> {
    vec![
        Effect::Loop(None),
        Effect::Release(ModuleId::Recursive),
        Effect::Completed(ModuleId::Recursive),
        Effect::SetVar(LAST_ENGAGEMENT.into(), Scalar::Text(format!("some {}", kind.describe()))),
    ]
}

fn exit(ctx: &ModuleCtx, kind: LoopKind, lead: &str) -> ResponseCandidate {
    cand(format!("{lead} {}", menu_text(ctx)), 1.0)
        .prompt(format!("recursive:exit:{}", ctx.state.turn_count))
        .menu()
        .with_effects(finish(kind))
}

/// The loop the user asked for this turn, with its topic.
fn requested(ctx: &ModuleCtx) -> Option<(LoopKind, String)> {
    let u = ctx.utt;
    let topic_or = |fallback: &str| u.topic.clone().unwrap_or_else(|| fallback.to_string());
    if ctx.affirm() {
        match &ctx.state.pending.offer {
            Some(Offer::Facts(t)) => return Some((LoopKind::Facts, t.clone())),
            Some(Offer::Sequence(k, t)) => return Some((*k, t.clone())),
            _ => {}
        }
    }
    if let Some(d) = ctx.delegation.filter(|_| ctx.delegated_to("recursive")) {
        let kind = d.kind.as_deref().and_then(parse_kind).unwrap_or(LoopKind::Facts);
        let topic = ctx.flow_topic.map(str::to_string).unwrap_or_else(|| topic_or(DEFAULT_FACT_TOPIC));
        return Some((kind, topic));
    }
    if ctx.deny() {
        return None;
    }
    if u.mentions("would you rather") {
        Some((LoopKind::WouldYouRather, topic_or("books")))
    } else if u.mentions("riddle") || u.mentions("riddles") {
        Some((LoopKind::Riddle, topic_or("riddles")))
    } else if u.mentions("hypothetical") {
        Some((LoopKind::Hypothetical, topic_or("hypotheticals")))
    } else if u.mentions("fact") || u.mentions("facts") {
        Some((LoopKind::Facts, topic_or(DEFAULT_FACT_TOPIC)))
    } else {
        None
    }
}

/// First item for a new loop, falling back to any topic of the same kind.
fn start_item<'a>(ctx: &ModuleCtx<'a>, kind: LoopKind, topic: &str) -> Option<&'a ContentItem> {
    next_item(ctx.res, ctx.state, &[kind], topic).or_else(|| {
        ctx.res
            .index
            .items()
            .filter(|i| content_kinds(kind).contains(&i.kind))
            .filter(|i| !ctx.state.surfaced(&prompt_for(i)))
            .min_by(|a, b| (&a.topic, &a.id).cmp(&(&b.topic, &b.id)))
    })
}

pub fn propose(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    let active = ctx.state.is_active(&ModuleId::Recursive);
    if let (true, Some(lp)) = (active, &ctx.state.modules.recursive) {
        return continue_loop(ctx, lp).into_iter().collect();
    }
    let Some((kind, topic)) = requested(ctx) else {
        return Vec::new();
    };
    let conf = if ctx.delegation.is_some() || ctx.affirm() { 1.0 } else { 0.9 };
    match start_item(ctx, kind, &topic).and_then(|i| present(i, true, conf)) {
        Some(c) => vec![c],
        None => vec![cand(format!("I'm all out of {} right now.", kind.describe()), 0.7)],
    }
}

fn continue_loop(ctx: &ModuleCtx, lp: &RecursiveLoop) -> Option<ResponseCandidate> {
    let u = ctx.utt;
    if u.has_intent("request_exit") {
        return None;
    }
    // A sequence question is waiting for the user's answer.
    if let Some(id) = &lp.awaiting {
        let item = ctx.res.index.get(id)?;
        let mine = item.agent_answer.as_deref().unwrap_or("I honestly can't decide!");
        let text = format!(
            "For me personally? {mine} Do you want to hear another {} question?",
            topic_name(&lp.topic)
        );
        return Some(
            cand(text, 1.0)
                .prompt(format!("recursive:{}:answer", item.id))
                .topic(lp.topic.clone())
                .act(DialogueAct::YesNoQuestion)
                .effect(Effect::Loop(Some(RecursiveLoop { awaiting: None, ..lp.clone() }))),
        );
    }
    // The user steered the loop to another topic.
    if let Some(t) = u.topic.as_ref().filter(|t| **t != lp.topic) {
        let kinds: Vec<LoopKind> = if lp.kind.is_sequence() {
            std::iter::once(lp.kind).chain(SEQUENCE_KINDS.iter().copied()).collect()
        } else {
            vec![lp.kind]
        };
        let item = next_item(ctx.res, ctx.state, &[lp.kind], t).or_else(|| next_item(ctx.res, ctx.state, &kinds, t));
        if let Some(c) = item.and_then(|i| present(i, false, 1.0)) {
            return Some(c);
        }
    }
    if ctx.deny() || ctx.wants_out() {
        return Some(exit(ctx, lp.kind, "Okay, let's do something else."));
    }
    if !ctx.affirm() && u.is_question() {
        return None;
    }
    match next_item(ctx.res, ctx.state, &[lp.kind], &lp.topic) {
        Some(item) => present(item, false, 1.0),
        None => Some(exit(ctx, lp.kind, &format!("That's all the {} I have for now.", lp.kind.describe()))),
    }
}
