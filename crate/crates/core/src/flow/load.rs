use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer};

use super::{Action, FlowError, FlowGraph, FlowNode, FlowSet, Postcondition, Precondition, ValidationRule};
use super::functions::{FunctionRegistry, BUILTIN_SLOTS};

/// Modules a flow node may hand a turn to.
const DELEGATE_TARGETS: &[&str] = &["recursive", "recommendation", "storytelling", "intimacy", "qa", "opinions"];

static SLOT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{([a-z_][a-z0-9_]*)\}").expect("slot regex"));

pub(crate) fn template_slots(template: &str) -> impl Iterator<Item = &str> {
    SLOT.captures_iter(template).map(|c| c.get(1).map_or("", |m| m.as_str()))
}

/// Object entries in file order, duplicates kept.
struct OrderedEntries(Vec<(String, serde_json::Value)>);

impl<'de> Deserialize<'de> for OrderedEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedEntries;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of node id to node")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, serde_json::Value>()? {
                    out.push((k, v));
                }
                Ok(OrderedEntries(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlow {
    id: String,
    topic: String,
    #[serde(default)]
    triggers: Vec<String>,
    #[serde(default)]
    entry_expects: Vec<String>,
    #[serde(default)]
    subroots: Vec<String>,
    nodes: OrderedEntries,
}

fn load_err(path: &Path, rule: ValidationRule, node: Option<&str>, msg: impl Into<String>) -> FlowError {
    FlowError::Load {
        path: path.to_path_buf(),
        rule,
        node: node.map(str::to_string),
        msg: msg.into(),
    }
}

/// Parses and validates one flow document. `path` is used for messages.
pub fn load_flow_str(body: &str, path: &Path, registry: &FunctionRegistry) -> Result<FlowGraph, FlowError> {
    let raw: RawFlow =
        serde_json::from_str(body).map_err(|e| load_err(path, ValidationRule::Parse, None, e.to_string()))?;
    let mut nodes = Vec::with_capacity(raw.nodes.0.len());
    for (id, value) in raw.nodes.0 {
        let node: FlowNode = serde_json::from_value(value)
            .map_err(|e| load_err(path, ValidationRule::Parse, Some(&id), e.to_string()))?;
        nodes.push((id, node));
    }
    let flow = FlowGraph {
        id: raw.id,
        topic: raw.topic,
        triggers: raw.triggers,
        entry_expects: raw.entry_expects,
        subroots: raw.subroots,
        nodes,
    };
    validate(&flow, registry).map_err(|(rule, node, msg)| load_err(path, rule, node.as_deref(), msg))?;
    Ok(flow)
}

pub fn load_flow(path: &Path, registry: &FunctionRegistry) -> Result<FlowGraph, FlowError> {
    let body = fs::read_to_string(path).map_err(|e| load_err(path, ValidationRule::Parse, None, e.to_string()))?;
    load_flow_str(&body, path, registry)
}

/// Per-file outcome of loading a flow directory.
pub type FlowLoad = (PathBuf, Result<FlowGraph, FlowError>);

/// Every `*.json` file in `dir`, sorted by file name, with its load result.
pub fn load_flow_dir(dir: &Path, registry: &FunctionRegistry) -> Result<Vec<FlowLoad>, FlowError> {
    let listing = fs::read_dir(dir).map_err(|e| load_err(dir, ValidationRule::Parse, None, e.to_string()))?;
    let mut paths: Vec<PathBuf> = listing
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| {
            let r = load_flow(&p, registry);
            (p, r)
        })
        .collect())
}

impl FlowSet {
    /// Loads every flow in the given directories; the first invalid file
    /// aborts loading.
    pub fn load_dirs(dirs: &[PathBuf], registry: &FunctionRegistry) -> Result<FlowSet, FlowError> {
        let mut set = FlowSet::default();
        for dir in dirs {
            for (_, result) in load_flow_dir(dir, registry)? {
                set.insert(result?);
            }
        }
        Ok(set)
    }
}

type Violation = (ValidationRule, Option<String>, String);

/// Checks every structural invariant of a flow.
pub fn validate(flow: &FlowGraph, registry: &FunctionRegistry) -> Result<(), Violation> {
    if flow.nodes.is_empty() || flow.entry_expects.is_empty() {
        return Err((ValidationRule::MissingEntry, None, "flow needs nodes and a non-empty entry_expects".into()));
    }
    let mut ids = BTreeSet::new();
    for (id, _) in &flow.nodes {
        if !ids.insert(id.as_str()) {
            return Err((ValidationRule::DuplicateId, Some(id.clone()), "node id declared twice".into()));
        }
    }
    for e in &flow.entry_expects {
        if !ids.contains(e.as_str()) {
            return Err((ValidationRule::DanglingExpects, None, format!("entry expects unknown node `{e}`")));
        }
    }
    for s in &flow.subroots {
        if !ids.contains(s.as_str()) {
            return Err((ValidationRule::DanglingSubroot, None, format!("subroot `{s}` is not a node")));
        }
    }
    for (id, node) in &flow.nodes {
        let at = || Some(id.clone());
        for e in &node.expects {
            if !ids.contains(e.as_str()) {
                return Err((ValidationRule::DanglingExpects, at(), format!("expects unknown node `{e}`")));
            }
        }
        for p in &node.preconditions {
            match p {
                Precondition::FunctionRef { name } if !registry.has_predicate(name) => {
                    return Err((ValidationRule::UnknownFunction, at(), format!("unknown predicate `{name}`")));
                }
                Precondition::SentimentRange { min, max }
                    if !(-1.0..=1.0).contains(min) || !(-1.0..=1.0).contains(max) || min > max =>
                {
                    return Err((ValidationRule::BadPrecondition, at(), format!("sentiment range [{min}, {max}]")));
                }
                _ => {}
            }
        }
        for p in &node.postconditions {
            if let Postcondition::CallFunction { name } = p {
                if !registry.has_action(name) {
                    return Err((ValidationRule::UnknownFunction, at(), format!("unknown function `{name}`")));
                }
            }
        }
        match &node.action {
            Action::Template(t) => {
                for slot in template_slots(t) {
                    if !BUILTIN_SLOTS.contains(&slot) && !registry.has_slot(slot) {
                        return Err((ValidationRule::UnknownFunction, at(), format!("unknown template slot `{slot}`")));
                    }
                }
            }
            Action::Delegate(d) => {
                if !DELEGATE_TARGETS.contains(&d.module.as_str()) {
                    return Err((ValidationRule::UnknownModule, at(), format!("cannot delegate to `{}`", d.module)));
                }
            }
            Action::Exit => {}
        }
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = flow
        .entry_expects
        .iter()
        .chain(&flow.subroots)
        .map(String::as_str)
        .collect();
    while let Some(n) = queue.pop_front() {
        if seen.insert(n) {
            if let Some(node) = flow.node(n) {
                queue.extend(node.expects.iter().map(String::as_str));
            }
        }
    }
    if let Some((id, _)) = flow.nodes.iter().find(|(id, _)| !seen.contains(id.as_str())) {
        return Err((ValidationRule::UnreachableNode, Some(id.clone()), "not reachable from entry or subroots".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(body: &str) -> Result<FlowGraph, FlowError> {
        load_flow_str(body, Path::new("t.json"), &FunctionRegistry::standard())
    }

    #[test]
    fn duplicate_keys_are_detected() {
        let body = r#"{"id":"f","topic":"t","entry_expects":["a"],"nodes":{
            "a":{"action":{"template":"hi"}},
            "a":{"action":"exit"}}}"#;
        assert_eq!(load(body).unwrap_err().rule(), Some(ValidationRule::DuplicateId));
    }

    #[test]
    fn node_order_is_preserved() {
        let body = r#"{"id":"f","topic":"t","entry_expects":["z","a"],"nodes":{
            "z":{"action":{"template":"z"}},
            "a":{"action":{"template":"a"}}}}"#;
        let f = load(body).unwrap();
        assert_eq!(f.node_ids().collect::<Vec<_>>(), vec!["z", "a"]);
    }

    #[test]
    fn empty_nodes_is_missing_entry() {
        let body = r#"{"id":"f","topic":"t","entry_expects":[],"nodes":{}}"#;
        assert_eq!(load(body).unwrap_err().rule(), Some(ValidationRule::MissingEntry));
    }

    #[test]
    fn unknown_slot_is_rejected() {
        let body = r#"{"id":"f","topic":"t","entry_expects":["a"],"nodes":{
            "a":{"action":{"template":"hello {nope}"}}}}"#;
        assert_eq!(load(body).unwrap_err().rule(), Some(ValidationRule::UnknownFunction));
    }
}
