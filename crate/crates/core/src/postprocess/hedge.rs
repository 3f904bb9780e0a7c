use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nlu::AnnotatedUtterance;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HedgeTrigger {
    Intent(String),
    /// A phrase occurring in the user turn.
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeRule {
    pub id: String,
    pub trigger: HedgeTrigger,
    /// Variants; one is chosen at random. Each ends with a comma.
    pub hedges: Vec<String>,
}

impl HedgeRule {
    pub fn matches(&self, utt: &AnnotatedUtterance) -> bool {
        match &self.trigger {
            HedgeTrigger::Intent(i) => utt.has_intent(i),
            HedgeTrigger::Keyword(k) => utt.mentions(k),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct HedgeSet {
    pub rules: Vec<HedgeRule>,
}

impl HedgeSet {
    /// One rule per line, JSON.
    pub fn load(path: &Path) -> Result<Self, String> {
        let body = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut rules = Vec::new();
        for (n, line) in body.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rule: HedgeRule =
                serde_json::from_str(line).map_err(|e| format!("{}:{}: {e}", path.display(), n + 1))?;
            if let Some(bad) = rule.hedges.iter().find(|h| !h.trim_end().ends_with([',', '!', '.'])) {
                return Err(format!("{}:{}: hedge `{bad}` must end with punctuation", path.display(), n + 1));
            }
            if rule.hedges.is_empty() {
                return Err(format!("{}:{}: rule `{}` has no hedges", path.display(), n + 1, rule.id));
            }
            rules.push(rule);
        }
        Ok(HedgeSet { rules })
    }

    pub fn first_match(&self, utt: &AnnotatedUtterance) -> Option<&HedgeRule> {
        self.rules.iter().find(|r| r.matches(utt))
    }
}

/// Prepends a hedge from the first matching rule. Returns the new text and
/// the rule id, or the text unchanged when no rule matches.
pub fn apply_hedge<R: Rng + ?Sized>(
    text: &str,
    utt: &AnnotatedUtterance,
    rules: &HedgeSet,
    rng: &mut R,
) -> (String, Option<String>) {
    let Some(rule) = rules.first_match(utt) else {
        return (text.to_string(), None);
    };
    let hedge = &rule.hedges[rng.random_range(0..rule.hedges.len())];
    let body = if hedge.trim_end().ends_with(',') { crate::modules::decapitalize(text) } else { text.to_string() };
    (format!("{} {body}", hedge.trim_end()), Some(rule.id.clone()))
}
