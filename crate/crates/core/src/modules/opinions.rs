//! Solicit, provide and justify opinions using the agent profile.

use super::{decapitalize, ModuleCtx};
use crate::candidate::{MergeRole, ModuleId, ResponseCandidate};
use crate::kg::{DiscourseRelation, EntityId};
use crate::memory::{Effect, Opinion, Polarity};
use crate::nlu::DialogueAct;

const OPINION_VERBS: &[&str] = &["like", "love", "enjoy", "adore", "hate", "dislike", "prefer"];
const LEADING_FILLER: &[&str] = &["the", "a", "an", "really", "to", "playing", "eating", "watching"];

fn cand(text: impl Into<String>, conf: f64) -> ResponseCandidate {
    ResponseCandidate::new(ModuleId::Opinions, text, conf)
}

/// The opinion the agent holds about the turn's entity or concept, with the
/// words used to refer to it.
fn held_opinion<'a>(ctx: &ModuleCtx<'a>) -> Option<(&'a Opinion, String, Option<EntityId>)> {
    let profile = &ctx.state.agent_profile;
    for id in ctx.utt.entity_ids().chain(ctx.focus) {
        if let Some(o) = profile.opinion(id.as_str()) {
            return Some((o, ctx.surface(id), Some(id.clone())));
        }
    }
    profile
        .opinion_for_tokens(&ctx.utt.tokens)
        .map(|o| (o, o.key.replace('_', " "), None))
}

/// Words after the first opinion verb, e.g. "blue" in "I like blue".
fn opinion_object(tokens: &[String]) -> Option<String> {
    let at = tokens.iter().position(|t| OPINION_VERBS.contains(&t.as_str()))?;
    let rest: Vec<&str> = tokens[at + 1..]
        .iter()
        .map(String::as_str)
        .skip_while(|t| LEADING_FILLER.contains(t))
        .take(4)
        .collect();
    (!rest.is_empty()).then(|| rest.join(" "))
}

pub fn propose(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    let u = ctx.utt;
    let mut out = Vec::new();
    if u.has_intent("request_opinion_justify") {
        out.extend(justify(ctx));
    } else if u.has_intent("request_opinion") || ctx.delegated_to("opinions") {
        out.extend(give(ctx));
    } else if u.has_intent("provide_opinion") {
        if let Some(object) = opinion_object(&u.tokens) {
            let feel = if u.sentiment < 0.0 { "negatively" } else { "positively" };
            out.push(
                cand(format!("Why do you feel {feel} about {object}?"), 0.9)
                    .relation(DiscourseRelation::Contingency)
                    .role(MergeRole::Question)
                    .entities(u.entity_ids().cloned())
                    .maybe_topic(u.topic.clone())
                    .effect(Effect::Interest(object)),
            );
        }
    }
    if u.has_intent("request_discuss_topic") {
        if let Some(id) = ctx.first_entity() {
            out.push(
                cand(format!("What are your thoughts about {}?", ctx.surface(id)), 0.6)
                    .role(MergeRole::Question)
                    .entities([id.clone()])
                    .maybe_topic(u.topic.clone()),
            );
        }
    }
    out
}

fn give(ctx: &ModuleCtx) -> Option<ResponseCandidate> {
    let u = ctx.utt;
    let Some((o, name, entity)) = held_opinion(ctx) else {
        let id = ctx.first_entity()?;
        let text = format!("I haven't really made up my mind about {} yet. What do you think of it?", ctx.surface(id));
        return Some(cand(text, 0.9).role(MergeRole::Question).entities([id.clone()]));
    };
    let favourite = u.mentions("favorite") || u.mentions("favourite");
    let text = if favourite {
        format!("{} {}", o.text, o.justification)
    } else if u.dialogue_act == DialogueAct::YesNoQuestion {
        match o.polarity {
            Polarity::Positive => format!("Yes, I believe {name} is really interesting. And you? What's your opinion?"),
            Polarity::Negative => format!("Honestly, I don't think {name} is that great. And you? What's your opinion?"),
        }
    } else {
        format!("{} In fact I think {} How about you, what's your opinion?", o.text, o.justification)
    };
    let role = if favourite { MergeRole::Statement } else { MergeRole::Question };
    Some(
        cand(text, 1.0)
            .act(DialogueAct::ProvideOpinion)
            .role(role)
            .entities(entity)
            .maybe_topic(u.topic.clone()),
    )
}

fn justify(ctx: &ModuleCtx) -> Option<ResponseCandidate> {
    match held_opinion(ctx) {
        Some((o, _, entity)) => Some(
            cand(format!("Well, {}", decapitalize(&o.justification)), 1.0)
                .act(DialogueAct::Statement)
                .relation(DiscourseRelation::Contingency)
                .role(MergeRole::Statement)
                .entities(entity),
        ),
        None => Some(cand("I'm not sure I can explain it. Why do you ask?", 0.85).relation(DiscourseRelation::Contingency)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    #[test]
    fn object_follows_the_verb() {
        assert_eq!(opinion_object(&tokenize("I like blue")), Some("blue".into()));
        assert_eq!(opinion_object(&tokenize("i really love playing chess")), Some("chess".into()));
        assert_eq!(opinion_object(&tokenize("I like")), None);
    }
}
