//! Graph-driven recommendations that alternate comparison questions and
//! expansion statements over the knowledge graph.
//!
//! A mention of an eligible entity opens a chain with a comparison question
//! ("Are you also going to check out the Louvre?"). Each following turn
//! expands on the last recommendation, then compares again from there.

use std::collections::BTreeSet;

use super::base::LAST_ENGAGEMENT;
use super::{decapitalize, ModuleCtx};
use crate::candidate::{MergeRole, ModuleId, ResponseCandidate};
use crate::kg::{DiscourseRelation, EntityId, RelationInstantiation};
use crate::memory::{Effect, RecommendationChain, Scalar};
use crate::nlu::DialogueAct;
use crate::text::capitalize;

/// Entity types recommendations are made for.
pub const ELIGIBLE_TYPES: &[&str] = &["city", "landmark", "museum", "artwork", "point_of_interest"];
/// Attribute relations rendered as "other <type> by <value>".
const CREATOR_RELS: &[&str] = &["artist", "author", "director", "architect"];

fn cand(text: impl Into<String>, conf: f64) -> ResponseCandidate {
    ResponseCandidate::new(ModuleId::Recommendation, text, conf)
}

fn eligible(ctx: &ModuleCtx, id: &EntityId) -> bool {
    ctx.res
        .graph
        .entity(id)
        .is_some_and(|e| ELIGIBLE_TYPES.iter().any(|t| e.has_type(t)))
}

/// Entities already recommended or discussed, which the chain skips.
fn excluded(ctx: &ModuleCtx) -> BTreeSet<EntityId> {
    let mut out = ctx.state.explored_entities.clone();
    out.extend(ctx.state.focus.iter().cloned());
    out
}

fn instantiate(ctx: &ModuleCtx, rel: DiscourseRelation, focus: &EntityId) -> Option<RelationInstantiation> {
    match ctx.res.graph.instantiate_relation(rel, focus, &excluded(ctx)) {
        Ok(found) => found.into_iter().next(),
        Err(e) => {
            tracing::debug!(error = %e, "relation instantiation failed");
            None
        }
    }
}

fn render_comparison(ctx: &ModuleCtx, found: &RelationInstantiation) -> String {
    let graph = &ctx.res.graph;
    let result = graph.name_of(&found.result);
    match (found.via(), found.pivot()) {
        (Some(rel), Some(pivot)) if CREATOR_RELS.contains(&rel) => {
            let kind = graph
                .entity(&found.focus)
                .and_then(|e| e.types.first().cloned())
                .unwrap_or_else(|| "work".into())
                .replace('_', " ");
            format!("Are you a fan of any other {kind} by {}?", graph.name_of(pivot))
        }
        _ => format!("Are you also going to check out {result}?"),
    }
}

fn render_expansion(ctx: &ModuleCtx, found: &RelationInstantiation) -> String {
    let name = capitalize(&ctx.res.graph.name_of(&found.result));
    match found.via() {
        Some(rel) if CREATOR_RELS.contains(&rel) => {
            format!("Well, I would think about it. It was made by {}, and that is worth knowing.", decapitalize(&name))
        }
        _ => format!("Well, I would think about it. {name} is there and that could be worth seeing."),
    }
}

fn step(ctx: &ModuleCtx, rel: DiscourseRelation, focus: &EntityId) -> Option<ResponseCandidate> {
    let found = instantiate(ctx, rel, focus)?;
    let (text, act) = match rel {
        DiscourseRelation::Comparison => (render_comparison(ctx, &found), DialogueAct::YesNoQuestion),
        _ => (render_expansion(ctx, &found), DialogueAct::ProvideOpinion),
    };
    let mut entities = vec![found.result.clone()];
    if let Some(p) = found.pivot() {
        if p != &found.result && p != focus {
            entities.push(p.clone());
        }
    }
    let role = if act.is_question() { MergeRole::Question } else { MergeRole::Statement };
    let mut effects = vec![
        Effect::ExploreEntity(focus.clone()),
        Effect::ExploreEntity(found.result.clone()),
        Effect::Recommendation(Some(RecommendationChain { focus: found.result.clone(), last_relation: Some(rel) })),
        Effect::SetActive(ModuleId::Recommendation),
        Effect::ExploreTopic("travel".into()),
    ];
    if let Some(p) = found.pivot() {
        effects.push(Effect::ExploreEntity(p.clone()));
    }
    Some(
        cand(text, 1.0)
            .act(act)
            .relation(rel)
            .role(role)
            .topic("travel")
            .entities(entities)
            .with_effects(effects),
    )
}

fn closing() -> ResponseCandidate {
    cand("That's all the places I can think of right now. I hope you have a great trip!", 1.0).with_effects([
        Effect::Recommendation(None),
        Effect::Release(ModuleId::Recommendation),
        Effect::Completed(ModuleId::Recommendation),
        Effect::SetVar(LAST_ENGAGEMENT.into(), Scalar::Text("some places worth seeing".into())),
    ])
}

pub fn propose(ctx: &ModuleCtx) -> Vec<ResponseCandidate> {
    let mentioned = ctx.utt.entity_ids().find(|id| eligible(ctx, id));
    let delegated = ctx.delegated_to("recommendation");
    let active = ctx.state.is_active(&ModuleId::Recommendation);
    if let Some(id) = mentioned {
        let conf_scale = if delegated || active { 1.0 } else { 0.6 };
        let c = step(ctx, DiscourseRelation::Comparison, id).or_else(|| step(ctx, DiscourseRelation::Expansion, id));
        return c.map(|mut c| {
            c.confidence = conf_scale;
            c
        })
        .into_iter()
        .collect();
    }
    if !active || ctx.wants_out() || ctx.utt.is_question() {
        return Vec::new();
    }
    let Some(chain) = &ctx.state.modules.recommendation else {
        return Vec::new();
    };
    let next = match chain.last_relation {
        Some(DiscourseRelation::Comparison) => [DiscourseRelation::Expansion, DiscourseRelation::Comparison],
        _ => [DiscourseRelation::Comparison, DiscourseRelation::Expansion],
    };
    let c = next.iter().find_map(|rel| step(ctx, *rel, &chain.focus));
    vec![c.unwrap_or_else(closing)]
}
