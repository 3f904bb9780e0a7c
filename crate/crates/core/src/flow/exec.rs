use serde::Serialize;

use super::functions::{ArgumentGraph, FunctionRegistry};
use super::load::template_slots;
use super::{Action, Delegation, FlowError, FlowGraph, FlowSet, Postcondition, Precondition};
use crate::candidate::ModuleId;
use crate::kg::{EntityId, KnowledgeGraph};
use crate::memory::{Effect, FlowCursor, Offer, SessionState};
use crate::nlu::AnnotatedUtterance;
use crate::text;

/// Everything a precondition, slot or postcondition may look at.
#[derive(Clone, Copy)]
pub struct FlowCtx<'a> {
    pub flow: &'a FlowGraph,
    pub state: &'a SessionState,
    pub utterance: &'a AnnotatedUtterance,
    pub graph: &'a KnowledgeGraph,
    pub arguments: &'a ArgumentGraph,
    pub registry: &'a FunctionRegistry,
}

fn holds(p: &Precondition, ctx: &FlowCtx) -> bool {
    let u = ctx.utterance;
    match p {
        Precondition::Keyword { any } => any.iter().any(|k| u.mentions(k)),
        Precondition::Intent { any } => any.iter().any(|i| u.has_intent(i)),
        Precondition::DialogueAct { any } => any.contains(&u.dialogue_act),
        Precondition::SentimentRange { min, max } => (*min..=*max).contains(&u.sentiment),
        Precondition::StateVarEquals { var, value } => ctx.state.state_vars.get(var) == Some(value),
        Precondition::EntityPresent { types } => u.entity_ids().any(|id| {
            types.is_empty()
                || ctx
                    .graph
                    .entity(id)
                    .is_some_and(|e| types.iter().any(|t| e.has_type(t)))
        }),
        Precondition::FunctionRef { name } => match ctx.registry.call_predicate(name, ctx) {
            Ok(b) => b,
            Err(e) => {
                tracing::warn!(flow = %ctx.flow.id, predicate = %name, error = %e, "predicate failed");
                false
            }
        },
    }
}

/// First node, in declaration order, that is in `expects` and whose
/// preconditions all hold.
pub fn match_node(ctx: &FlowCtx, expects: &[String]) -> Option<String> {
    ctx.flow
        .nodes
        .iter()
        .filter(|(id, _)| expects.contains(id))
        .find(|(_, node)| node.preconditions.iter().all(|p| holds(p, ctx)))
        .map(|(id, _)| id.clone())
}

fn first_entity(ctx: &FlowCtx) -> Option<EntityId> {
    ctx.utterance.entity_ids().next().cloned()
}

fn builtin_slot(name: &str, ctx: &FlowCtx) -> Option<String> {
    match name {
        "entity" => first_entity(ctx).map(|id| ctx.graph.name_of(&id)),
        "focus" => ctx.state.focus.top().map(|id| ctx.graph.name_of(id)),
        "topic" => Some(ctx.flow.topic.replace('_', " ")),
        _ => None,
    }
}

/// Fills `{slot}` placeholders. Unresolvable slots are an error.
pub fn render_template(template: &str, ctx: &FlowCtx) -> Result<String, FlowError> {
    let mut out = template.to_string();
    for slot in template_slots(template).collect::<Vec<_>>() {
        let value = builtin_slot(slot, ctx)
            .or_else(|| ctx.registry.call_slot(slot, ctx))
            .ok_or_else(|| FlowError::UnresolvedSlot(slot.to_string()))?;
        out = out.replace(&format!("{{{slot}}}"), &value);
    }
    Ok(text::squash_whitespace(&out))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum StepOutput {
    Say {
        node: String,
        text: String,
        expects: Vec<String>,
        #[serde(skip)]
        effects: Vec<Effect>,
    },
    Delegate {
        node: String,
        delegation: Delegation,
        expects: Vec<String>,
        #[serde(skip)]
        effects: Vec<Effect>,
    },
    Exit {
        node: Option<String>,
        #[serde(skip)]
        effects: Vec<Effect>,
    },
}

impl StepOutput {
    pub fn node(&self) -> Option<&str> {
        match self {
            StepOutput::Say { node, .. } | StepOutput::Delegate { node, .. } => Some(node),
            StepOutput::Exit { node, .. } => node.as_deref(),
        }
    }

    pub fn effects(&self) -> &[Effect] {
        match self {
            StepOutput::Say { effects, .. }
            | StepOutput::Delegate { effects, .. }
            | StepOutput::Exit { effects, .. } => effects,
        }
    }

    pub fn is_exit(&self) -> bool {
        matches!(self, StepOutput::Exit { .. })
    }
}

fn exit_effects(flow: &FlowGraph) -> Vec<Effect> {
    vec![
        Effect::Flow { id: flow.id.clone(), cursor: None },
        Effect::Completed(ModuleId::flow(flow.id.clone())),
    ]
}

/// Postconditions in order. A failing function stops the remaining ones and
/// is logged; the flow itself carries on.
fn postcondition_effects(node_id: &str, posts: &[Postcondition], ctx: &FlowCtx) -> Vec<Effect> {
    let mut out = Vec::new();
    for p in posts {
        match p {
            Postcondition::SetStateVar { name, value } => out.push(Effect::SetVar(name.clone(), value.clone())),
            Postcondition::MarkExplored { topic } => {
                out.push(Effect::ExploreTopic(topic.clone().unwrap_or_else(|| ctx.flow.topic.clone())))
            }
            Postcondition::PushFocus { entity } => {
                if let Some(id) = entity.as_deref().map(EntityId::from).or_else(|| first_entity(ctx)) {
                    out.push(Effect::PushFocus(id));
                }
            }
            Postcondition::CallFunction { name } => match ctx.registry.call_action(name, ctx) {
                Ok(effects) => out.extend(effects),
                Err(e) => {
                    tracing::warn!(flow = %ctx.flow.id, node = node_id, function = %name, error = %e, "postcondition failed");
                    break;
                }
            },
        }
    }
    out
}

/// Executes the matched node, or exits the flow when nothing matched.
pub fn step(ctx: &FlowCtx, matched: Option<&str>) -> Result<StepOutput, FlowError> {
    let flow = ctx.flow;
    let Some(node_id) = matched else {
        return Ok(StepOutput::Exit { node: None, effects: exit_effects(flow) });
    };
    let node = flow
        .node(node_id)
        .ok_or_else(|| FlowError::UnknownFlow(format!("{}#{node_id}", flow.id)))?;
    let mut effects = postcondition_effects(node_id, &node.postconditions, ctx);
    let cursor = Effect::Flow {
        id: flow.id.clone(),
        cursor: Some(FlowCursor { expects: node.expects.clone(), last_node: Some(node_id.to_string()) }),
    };
    Ok(match &node.action {
        Action::Template(t) => {
            let text = render_template(t, ctx)?;
            effects.push(cursor);
            StepOutput::Say { node: node_id.to_string(), text, expects: node.expects.clone(), effects }
        }
        Action::Delegate(d) => {
            effects.push(cursor);
            StepOutput::Delegate {
                node: node_id.to_string(),
                delegation: d.clone(),
                expects: node.expects.clone(),
                effects,
            }
        }
        Action::Exit => {
            effects.extend(exit_effects(flow));
            StepOutput::Exit { node: Some(node_id.to_string()), effects }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "via", rename_all = "snake_case")]
pub enum Trigger {
    Keyword { flow: String, phrase: String },
    Offer { flow: String },
}

impl Trigger {
    pub fn flow(&self) -> &str {
        match self {
            Trigger::Keyword { flow, .. } | Trigger::Offer { flow } => flow,
        }
    }

    pub fn phrase(&self) -> Option<&str> {
        match self {
            Trigger::Keyword { phrase, .. } => Some(phrase),
            Trigger::Offer { .. } => None,
        }
    }
}

/// Picks the flow the user asked for: an accepted standing offer first,
/// then a keyword trigger, preferring unexplored flows and longer phrases.
pub fn trigger(flows: &FlowSet, state: &SessionState, utterance: &AnnotatedUtterance) -> Option<Trigger> {
    if let Some(Offer::Flow(id)) = &state.pending.offer {
        if utterance.has_intent("affirm") && flows.get(id).is_some() {
            return Some(Trigger::Offer { flow: id.clone() });
        }
    }
    let mut best: Option<(bool, usize, &str, &str)> = None;
    for flow in flows.iter() {
        let unexplored = !state.explored_topics.contains(&flow.id);
        for phrase in &flow.triggers {
            if !utterance.mentions(phrase) {
                continue;
            }
            let len = text::tokenize(phrase).len();
            let better = match best {
                None => true,
                Some((u, l, _, _)) => (unexplored, len) > (u, l),
            };
            if better {
                best = Some((unexplored, len, flow.id.as_str(), phrase.as_str()));
            }
        }
    }
    best.map(|(_, _, flow, phrase)| Trigger::Keyword { flow: flow.to_string(), phrase: phrase.to_string() })
}
