//! Mixed-initiative content lookup: trivia and indexed conversational turns
//! about the entities the user mentioned.

use super::ModuleCtx;
use crate::candidate::{MergeRole, ModuleId, ResponseCandidate};
use crate::retrieval::{ContentItem, ContentKind, RetrievalQuery};

/// Minimum retrieval score for a keyword-only match.
const MIN_TERM_SCORE: f64 = 0.35;

pub fn prompt_for(item: &ContentItem) -> String {
    format!("retrieval:{}", item.id)
}

fn candidate(item: &ContentItem) -> ResponseCandidate {
    let role = if item.dialogue_act.is_question() { MergeRole::Question } else { MergeRole::Statement };
    let mut c = ResponseCandidate::new(ModuleId::Retrieval, item.text.clone(), 0.6)
        .act(item.dialogue_act)
        .topic(item.topic.clone())
        .entities(item.entities.clone())
        .prompt(prompt_for(item))
        .role(role);
    c.discourse_relation = item.discourse_relation;
    c.safe = item.safe;
    c
}

pub fn propose(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    let u = ctx.utt;
    if u.is_question() && !u.has_intent("request_discuss_topic") && u.entities.is_empty() {
        return Vec::new();
    }
    let surfaced: Vec<String> = ctx
        .res
        .index
        .items()
        .filter(|i| ctx.state.surfaced(&crate::candidate::PromptId::new(prompt_for(i))))
        .map(|i| i.id.clone())
        .collect();
    let kinds = [ContentKind::Trivia, ContentKind::DialogueTurn];
    let hits: Vec<&ContentItem> = match ctx.first_entity() {
        Some(id) => ctx
            .res
            .index
            .search(
                &RetrievalQuery::entity(id.clone())
                    .kinds(&kinds)
                    .excluding(surfaced)
                    .limit(10),
            )
            .into_iter()
            .map(|h| h.item)
            .collect(),
        None if u.content_words.len() >= 2 => ctx
            .res
            .index
            .search(&RetrievalQuery::terms(u.content_words.join(" ")).kinds(&kinds).excluding(surfaced).limit(10))
            .into_iter()
            .filter(|h| h.score >= MIN_TERM_SCORE)
            .map(|h| h.item)
            .collect(),
        None => Vec::new(),
    };
    let statement = hits.iter().find(|i| !i.dialogue_act.is_question());
    let question = hits.iter().find(|i| i.dialogue_act.is_question());
    statement.into_iter().chain(question).map(|i| candidate(i)).collect()
}
