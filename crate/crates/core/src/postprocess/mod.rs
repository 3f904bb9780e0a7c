//! Surface realization of the winning candidate: merging with a follow-up
//! question, acknowledgement hedges and speech markup.

mod hedge;
mod merge;
mod ssml;

use serde::{Deserialize, Serialize};

pub use hedge::{apply_hedge, HedgeRule, HedgeSet, HedgeTrigger};
pub use merge::{merge, merge_partner};
pub use ssml::{emit_ssml, plain_ssml, strip_tags, SsmlError};

use crate::candidate::PromptId;

/// Which candidates and rules produced a reply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub winner: PromptId,
    pub merged: Option<PromptId>,
    pub hedge_rule: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalReply {
    #[serde(rename = "text")]
    pub display_text: String,
    #[serde(rename = "ssml")]
    pub ssml_text: String,
    pub provenance: Provenance,
}
