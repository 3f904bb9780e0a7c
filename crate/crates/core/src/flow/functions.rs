use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::exec::FlowCtx;
use crate::memory::{Effect, Scalar};

/// Slots every template may use without registration.
pub const BUILTIN_SLOTS: &[&str] = &["entity", "focus", "topic"];

pub type PredicateFn = fn(&FlowCtx) -> Result<bool, String>;
pub type SlotFn = fn(&FlowCtx) -> Option<String>;
pub type ActionFn = fn(&FlowCtx) -> Result<Vec<Effect>, String>;

/// Named functions flows may reference.
#[derive(Clone, Default)]
pub struct FunctionRegistry {
    predicates: BTreeMap<&'static str, PredicateFn>,
    slots: BTreeMap<&'static str, SlotFn>,
    actions: BTreeMap<&'static str, ActionFn>,
}

impl std::fmt::Debug for FunctionRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionRegistry")
            .field("predicates", &self.predicates.keys().collect::<Vec<_>>())
            .field("slots", &self.slots.keys().collect::<Vec<_>>())
            .field("actions", &self.actions.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl FunctionRegistry {
    /// The functions shipped with the engine, including the argument-graph
    /// navigation used by the nutrition flow.
    pub fn standard() -> Self {
        let mut r = FunctionRegistry::default();
        r.predicate("agreeable", agreeable);
        r.predicate("inquisitive", inquisitive);
        r.predicate("negative", negative);
        r.predicate("has_next", has_next);
        r.slot("nutrition_claim", |c| current_claim(c).map(|cl| cl.claim.clone()));
        r.slot("support", |c| current_claim(c).and_then(|cl| cl.support.first().cloned()));
        r.slot("counter", |c| current_claim(c).and_then(|cl| cl.counter.first().cloned()));
        r.slot("next_claim", |c| next_claim(c).map(|cl| cl.claim.clone()));
        r.action("start_claim", |c| {
            let claim = current_claim(c).ok_or("no nutrition claim left")?;
            Ok(select_claim(claim))
        });
        r.action("advance_claim", |c| {
            let claim = next_claim(c).ok_or("no related nutrition claim left")?;
            Ok(select_claim(claim))
        });
        r
    }

    pub fn predicate(&mut self, name: &'static str, f: PredicateFn) {
        self.predicates.insert(name, f);
    }

    pub fn slot(&mut self, name: &'static str, f: SlotFn) {
        self.slots.insert(name, f);
    }

    pub fn action(&mut self, name: &'static str, f: ActionFn) {
        self.actions.insert(name, f);
    }

    pub fn has_predicate(&self, name: &str) -> bool {
        self.predicates.contains_key(name)
    }

    pub fn has_slot(&self, name: &str) -> bool {
        self.slots.contains_key(name)
    }

    pub fn has_action(&self, name: &str) -> bool {
        self.actions.contains_key(name)
    }

    pub(crate) fn call_predicate(&self, name: &str, ctx: &FlowCtx) -> Result<bool, String> {
        let f = self.predicates.get(name).ok_or_else(|| format!("unknown predicate `{name}`"))?;
        f(ctx)
    }

    pub(crate) fn call_slot(&self, name: &str, ctx: &FlowCtx) -> Option<String> {
        self.slots.get(name).and_then(|f| f(ctx))
    }

    pub(crate) fn call_action(&self, name: &str, ctx: &FlowCtx) -> Result<Vec<Effect>, String> {
        let f = self.actions.get(name).ok_or_else(|| format!("unknown function `{name}`"))?;
        f(ctx)
    }
}

fn agreeable(c: &FlowCtx) -> Result<bool, String> {
    let u = c.utterance;
    Ok(u.has_intent("affirm") || (u.sentiment > 0.25 && !u.is_question()))
}

fn inquisitive(c: &FlowCtx) -> Result<bool, String> {
    let u = c.utterance;
    Ok(u.is_question() || u.mentions("why") || u.mentions("how come") || u.mentions("really"))
}

fn negative(c: &FlowCtx) -> Result<bool, String> {
    let u = c.utterance;
    Ok(u.has_intent("deny") || u.sentiment < -0.25)
}

fn has_next(c: &FlowCtx) -> Result<bool, String> {
    Ok(next_claim(c).is_some())
}

const CLAIM_VAR: &str = "nutrition_claim";

fn claim_explored(c: &FlowCtx, id: &str) -> bool {
    c.state.module_explored(&format!("nutrition:{id}"))
}

fn current_claim<'a>(c: &FlowCtx<'a>) -> Option<&'a Claim> {
    match c.state.state_vars.get(CLAIM_VAR).and_then(Scalar::as_str) {
        Some(id) => c.arguments.get(id),
        None => c.arguments.claims.iter().find(|cl| !claim_explored(c, &cl.id)),
    }
}

fn next_claim<'a>(c: &FlowCtx<'a>) -> Option<&'a Claim> {
    let current = current_claim(c)?;
    current
        .related
        .iter()
        .filter_map(|id| c.arguments.get(id))
        .chain(c.arguments.claims.iter())
        .find(|cl| cl.id != current.id && !claim_explored(c, &cl.id))
}

fn select_claim(claim: &Claim) -> Vec<Effect> {
    vec![
        Effect::SetVar(CLAIM_VAR.into(), Scalar::Text(claim.id.clone())),
        Effect::ExploreModule(format!("nutrition:{}", claim.id)),
    ]
}

/// A claim with its supporting and opposing arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub claim: String,
    #[serde(default)]
    pub support: Vec<String>,
    #[serde(default)]
    pub counter: Vec<String>,
    #[serde(default)]
    pub related: Vec<String>,
}

/// Hierarchical knowledge base navigated recursively by a flow.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentGraph {
    pub claims: Vec<Claim>,
}

impl ArgumentGraph {
    pub fn load(path: &Path) -> Result<Self, String> {
        let body = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let g: ArgumentGraph = serde_json::from_str(&body).map_err(|e| format!("{}: {e}", path.display()))?;
        for c in &g.claims {
            if let Some(bad) = c.related.iter().find(|r| g.get(r).is_none()) {
                return Err(format!("{}: claim `{}` relates to unknown claim `{bad}`", path.display(), c.id));
            }
        }
        Ok(g)
    }

    pub fn get(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }
}
