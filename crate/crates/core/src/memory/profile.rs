use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MemoryError;
use crate::candidate::ModuleId;
use crate::nlu::Mood;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub module: ModuleId,
    pub liked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub mood: Mood,
    pub intimacy_allowance: u32,
    pub interests: BTreeSet<String>,
    pub feedback: Vec<FeedbackEntry>,
    /// User turns needed to unlock each further intimacy level.
    pub intimacy_period: u32,
}

impl Default for UserProfile {
    fn default() -> Self {
        UserProfile {
            mood: Mood::Neutral,
            intimacy_allowance: 1,
            interests: BTreeSet::new(),
            feedback: Vec::new(),
            intimacy_period: 10,
        }
    }
}

impl UserProfile {
    /// Allowance starts at 1 and grows by one every `intimacy_period` user
    /// turns. It never decreases.
    pub fn update_allowance(&mut self, turn_count: u32) {
        let period = self.intimacy_period.max(1);
        self.intimacy_allowance = self.intimacy_allowance.max(1 + turn_count / period);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

/// One opinion record. `key` is an entity id or a concept name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opinion {
    pub key: String,
    pub polarity: Polarity,
    pub text: String,
    pub justification: String,
    /// Phrases that select this concept when no entity is linked.
    #[serde(default)]
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct OpinionPack {
    by_key: BTreeMap<String, Vec<Opinion>>,
}

impl OpinionPack {
    pub fn load(path: &Path) -> Result<Self, MemoryError> {
        let err = |msg: String| MemoryError::Resource { path: path.display().to_string(), msg };
        let body = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut opinions = Vec::new();
        for (n, line) in body.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let o: Opinion = serde_json::from_str(line).map_err(|e| err(format!("line {}: {e}", n + 1)))?;
            opinions.push(o);
        }
        Ok(Self::from_opinions(opinions))
    }

    pub fn from_opinions(opinions: Vec<Opinion>) -> Self {
        let mut by_key: BTreeMap<String, Vec<Opinion>> = BTreeMap::new();
        for o in opinions {
            by_key.entry(o.key.clone()).or_default().push(o);
        }
        OpinionPack { by_key }
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    pub fn len(&self) -> usize {
        self.by_key.values().map(Vec::len).sum()
    }

    pub fn alternatives(&self, key: &str) -> &[Opinion] {
        self.by_key.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.by_key.keys()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentProfile {
    pub opinions: BTreeMap<String, Opinion>,
}

impl AgentProfile {
    pub fn opinion(&self, key: &str) -> Option<&Opinion> {
        self.opinions.get(key)
    }

    /// Concept opinion whose keyword phrase occurs in `tokens`.
    pub fn opinion_for_tokens(&self, tokens: &[String]) -> Option<&Opinion> {
        self.opinions.values().find(|o| {
            o.keywords
                .iter()
                .any(|k| crate::text::contains_phrase(tokens, &crate::text::tokenize(k)))
        })
    }
}

/// Picks one opinion per key uniformly with a seeded generator.
pub fn init_agent_profile(pack: &OpinionPack, seed: u64) -> Result<AgentProfile, MemoryError> {
    if pack.is_empty() {
        return Err(MemoryError::EmptyOpinionPack);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opinions = pack
        .by_key
        .iter()
        .map(|(k, alts)| (k.clone(), alts[rng.random_range(0..alts.len())].clone()))
        .collect();
    Ok(AgentProfile { opinions })
}
