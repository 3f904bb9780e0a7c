//! Pattern-reflection probes for questions too short to answer.

use std::fs;
use std::path::Path;

use regex::Regex;
use serde::Deserialize;

/// First/second person swaps applied to captured fragments.
const REFLECTIONS: &[(&str, &str)] = &[
    ("i", "you"),
    ("me", "you"),
    ("my", "your"),
    ("mine", "yours"),
    ("am", "are"),
    ("i'm", "you are"),
    ("i've", "you have"),
    ("i'll", "you will"),
    ("myself", "yourself"),
    ("you", "I"),
    ("your", "my"),
    ("yours", "mine"),
    ("you're", "I am"),
    ("you've", "I have"),
    ("you'll", "I will"),
    ("yourself", "myself"),
    ("are", "am"),
];

#[derive(Debug, Clone)]
pub struct ElizaRule {
    pub pattern: Regex,
    pub responses: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    pattern: String,
    responses: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Eliza {
    rules: Vec<ElizaRule>,
}

pub fn reflect(fragment: &str) -> String {
    fragment
        .split_whitespace()
        .map(|w| {
            REFLECTIONS
                .iter()
                .find(|(from, _)| *from == w)
                .map_or(w, |(_, to)| to)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

impl Eliza {
    /// Loads a JSONL rule file: `{"pattern": regex, "responses": [template]}`.
    /// Templates refer to capture groups as `{1}`, `{2}` and so on.
    pub fn load(path: &Path) -> Result<Self, String> {
        let body = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut rules = Vec::new();
        for (n, line) in body.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawRule =
                serde_json::from_str(line).map_err(|e| format!("{}: line {}: {e}", path.display(), n + 1))?;
            if raw.responses.is_empty() {
                return Err(format!("{}: line {}: no responses", path.display(), n + 1));
            }
            let pattern = Regex::new(&format!("(?i)^{}$", raw.pattern))
                .map_err(|e| format!("{}: line {}: {e}", path.display(), n + 1))?;
            rules.push(ElizaRule { pattern, responses: raw.responses });
        }
        Ok(Eliza { rules })
    }

    pub fn from_rules(rules: Vec<ElizaRule>) -> Self {
        Eliza { rules }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Probe for the normalized utterance. `variant` picks among a rule's
    /// responses so repeated probes vary deterministically.
    pub fn respond(&self, tokens: &[String], variant: usize) -> Option<String> {
        let input = tokens.join(" ");
        self.rules.iter().find_map(|rule| {
            let caps = rule.pattern.captures(&input)?;
            let template = &rule.responses[variant % rule.responses.len()];
            let mut out = template.clone();
            for i in 1..caps.len() {
                let frag = caps.get(i).map_or("", |m| m.as_str());
                out = out.replace(&format!("{{{i}}}"), &reflect(frag));
            }
            Some(crate::text::squash_whitespace(&out))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    #[test]
    fn reflection_swaps_person() {
        assert_eq!(reflect("i am sad about my dog"), "you are sad about your dog");
        assert_eq!(reflect("you are smart"), "I am smart");
    }

    #[test]
    fn captures_are_reflected() {
        let e = Eliza::from_rules(vec![ElizaRule {
            pattern: Regex::new("(?i)^i feel (.*)$").unwrap(),
            responses: vec!["Why do you feel {1}?".into()],
        }]);
        assert_eq!(e.respond(&tokenize("I feel my cat hates me"), 0).unwrap(), "Why do you feel your cat hates you?");
        assert!(e.respond(&tokenize("hello"), 0).is_none());
    }
}
