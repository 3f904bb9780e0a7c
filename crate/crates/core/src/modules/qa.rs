//! Question answering in three steps: an ELIZA probe for content-poor
//! questions, structured answers from the module holding the initiative,
//! then pronoun resolution and the search-provider cascade.

use std::time::Duration;

use super::stories::active_story;
use super::ModuleCtx;
use crate::candidate::{MergeRole, ModuleId, ResponseCandidate};
use crate::memory::is_third_person_pronoun;
use crate::nlu::DialogueAct;
use crate::retrieval::{search_provider_cascade, Answer, ContentKind, RetrievalQuery};
use crate::text;

fn cand(text: impl Into<String>, conf: f64) -> ResponseCandidate {
    ResponseCandidate::new(ModuleId::QuestionAnswering, text, conf)
}

/// "tell me about X" style requests are answered with a summary.
fn is_summary_request(ctx: &ModuleCtx) -> bool {
    ctx.utt.has_intent("request_discuss_topic") && ctx.first_entity().is_some()
}

/// For "tell me about X", a stored fact whose primary entity is X.
fn summary_fact(ctx: &ModuleCtx) -> Option<Answer> {
    if !is_summary_request(ctx) {
        return None;
    }
    let id = ctx.first_entity()?;
    let q = RetrievalQuery::entity(id.clone()).kinds(&[ContentKind::Fact]).limit(50);
    ctx.res
        .index
        .search(&q)
        .into_iter()
        .find(|hit| hit.item.entities.first() == Some(id))
        .map(|hit| Answer { text: hit.item.text.clone(), entities: hit.item.entities.clone() })
}

/// The question with referring pronouns replaced by the focus entity name.
pub fn rewrite_with_focus(tokens: &[String], name: &str) -> String {
    let mut replaced = false;
    let words: Vec<String> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let base = text::term(t);
            let expletive = base == "it" && tokens.get(i + 1).is_some_and(|n| n == "that");
            if replaced || expletive || !(is_third_person_pronoun(base) || t == "its") {
                return t.clone();
            }
            replaced = true;
            if t.ends_with("'s") || t == "its" {
                format!("{name}'s")
            } else {
                name.to_string()
            }
        })
        .collect();
    words.join(" ")
}

pub fn propose(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    let u = ctx.utt;
    let summary = is_summary_request(ctx);
    if !(u.is_question() || summary || ctx.delegated_to("qa")) {
        return Vec::new();
    }
    let cfg = &ctx.res.config.dialogue;

    // Step 1: too few content words to know what is asked.
    let content = u.content_words.len() + usize::from(ctx.focus.is_some());
    if !summary && content < cfg.qa_min_content_words {
        let probe = ctx
            .res
            .eliza
            .respond(&u.tokens, ctx.state.turn_count as usize)
            .unwrap_or_else(|| "What makes you ask that?".into());
        return vec![cand(probe, 0.85).prompt(format!("qa:eliza:{}", ctx.state.turn_count))];
    }

    // Step 2: the module holding the initiative answers from its own data.
    if ctx.state.is_active(&ModuleId::Storytelling) {
        if let Some((story, _)) = active_story(ctx) {
            if let Some(answer) = story.answer(&u.raw_text) {
                return vec![cand(answer, 1.0)
                    .act(DialogueAct::Statement)
                    .topic("stories")
                    .on_behalf_of(ModuleId::Storytelling)];
            }
        }
    }

    // Step 3: resolve the pronoun and ask the providers in order.
    let question = match ctx.focus {
        Some(id) => rewrite_with_focus(&u.tokens, &ctx.name(id)),
        None => u.raw_text.clone(),
    };
    let answer = summary_fact(ctx).or_else(|| {
        let timeout = Duration::from_millis(ctx.res.config.providers.timeout_ms);
        search_provider_cascade(&question, &ctx.res.providers, timeout).answer
    });
    match answer {
        Some(answer) => {
            let mut entities = answer.entities.clone();
            for id in u.entity_ids().chain(ctx.focus) {
                if !entities.contains(id) {
                    entities.push(id.clone());
                }
            }
            vec![cand(answer.text, 1.0)
                .act(DialogueAct::Statement)
                .role(MergeRole::Statement)
                .entities(entities)
                .maybe_topic(u.topic.clone())]
        }
        None if summary => Vec::new(),
        None => vec![cand(
            format!("{}. I don't know the answer to that yet, but I'll try to find out for next time.", cfg.inability_phrase),
            0.85,
        )
        .prompt("qa:unable")
        .menu()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    #[test]
    fn possessive_pronoun_becomes_possessive_name() {
        assert_eq!(
            rewrite_with_focus(&tokenize("What is it's population?"), "Mexico City"),
            "what is Mexico City's population"
        );
        assert_eq!(rewrite_with_focus(&tokenize("how big is it"), "Paris"), "how big is Paris");
        assert_eq!(
            rewrite_with_focus(&tokenize("how is it that you are smart"), "Paris"),
            "how is it that you are smart"
        );
    }
}
