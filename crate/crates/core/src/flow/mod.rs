//! Declarative dialogue flows: graphs of nodes with preconditions, one
//! action and postconditions, walked one expectation set at a time.

mod exec;
mod functions;
mod load;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::memory::Scalar;
use crate::nlu::DialogueAct;

pub use exec::{match_node, render_template, step, trigger, FlowCtx, StepOutput, Trigger};
pub use functions::{ArgumentGraph, Claim, FunctionRegistry};
pub use load::{load_flow, load_flow_dir, load_flow_str, validate};

/// A precondition. All preconditions of a node must hold for it to match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Precondition {
    /// Any of the phrases occurs in the utterance.
    Keyword { any: Vec<String> },
    Intent { any: Vec<String> },
    DialogueAct { any: Vec<DialogueAct> },
    SentimentRange { min: f64, max: f64 },
    StateVarEquals { var: String, value: Scalar },
    /// Some detected entity, optionally restricted to the given types.
    EntityPresent {
        #[serde(default)]
        types: Vec<String>,
    },
    FunctionRef { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delegation {
    pub module: String,
    #[serde(default)]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Template(String),
    Delegate(Delegation),
    Exit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Postcondition {
    SetStateVar { name: String, value: Scalar },
    /// Marks a topic explored; defaults to the flow topic.
    MarkExplored {
        #[serde(default)]
        topic: Option<String>,
    },
    /// Pushes the given entity, or the first entity of the utterance.
    PushFocus {
        #[serde(default)]
        entity: Option<String>,
    },
    CallFunction { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowNode {
    #[serde(default)]
    pub preconditions: Vec<Precondition>,
    pub action: Action,
    #[serde(default)]
    pub postconditions: Vec<Postcondition>,
    #[serde(default)]
    pub expects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowGraph {
    pub id: String,
    pub topic: String,
    pub triggers: Vec<String>,
    pub entry_expects: Vec<String>,
    pub subroots: Vec<String>,
    /// Declaration order is significant for matching.
    pub nodes: Vec<(String, FlowNode)>,
}

impl FlowGraph {
    pub fn node(&self, id: &str) -> Option<&FlowNode> {
        self.nodes.iter().find(|(n, _)| n == id).map(|(_, node)| node)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|(n, _)| n.as_str())
    }
}

/// Name of the validation rule a flow file broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationRule {
    Parse,
    MissingEntry,
    DuplicateId,
    DanglingExpects,
    DanglingSubroot,
    UnreachableNode,
    UnknownFunction,
    UnknownModule,
    BadPrecondition,
}

impl ValidationRule {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidationRule::Parse => "parse",
            ValidationRule::MissingEntry => "missing_entry",
            ValidationRule::DuplicateId => "duplicate_id",
            ValidationRule::DanglingExpects => "dangling_expects",
            ValidationRule::DanglingSubroot => "dangling_subroot",
            ValidationRule::UnreachableNode => "unreachable_node",
            ValidationRule::UnknownFunction => "unknown_function",
            ValidationRule::UnknownModule => "unknown_module",
            ValidationRule::BadPrecondition => "bad_precondition",
        }
    }
}

impl fmt::Display for ValidationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FlowError {
    #[error("{}: {rule}{}: {msg}", path.display(), node.as_ref().map(|n| format!(" at node `{n}`")).unwrap_or_default())]
    Load {
        path: PathBuf,
        rule: ValidationRule,
        node: Option<String>,
        msg: String,
    },
    #[error("template slot `{0}` could not be resolved")]
    UnresolvedSlot(String),
    #[error("unknown flow `{0}`")]
    UnknownFlow(String),
}

impl FlowError {
    pub fn rule(&self) -> Option<ValidationRule> {
        match self {
            FlowError::Load { rule, .. } => Some(*rule),
            _ => None,
        }
    }
}

/// All loaded flows keyed by id.
#[derive(Debug, Clone, Default)]
pub struct FlowSet {
    pub flows: BTreeMap<String, FlowGraph>,
}

impl FlowSet {
    pub fn get(&self, id: &str) -> Option<&FlowGraph> {
        self.flows.get(id)
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FlowGraph> {
        self.flows.values()
    }

    pub fn insert(&mut self, flow: FlowGraph) {
        self.flows.insert(flow.id.clone(), flow);
    }
}
