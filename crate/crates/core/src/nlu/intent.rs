use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use regex::Regex;
use serde::Deserialize;

use super::{IntentLabel, NluError};
use crate::text;

/// Labels shipped in the default inventory file.
pub const DEFAULT_INVENTORY: &[&str] = &[
    "request_opinion",
    "request_change_topic",
    "request_opinion_justify",
    "assertion_on_bot",
    "request_exit",
    "request_service",
    "request_discuss_topic",
    "request_confirm_understanding",
    "provide_opinion",
    "affirm",
    "deny",
    "thanks",
    "kidding_check",
    "statement",
    "question_factual",
    "unknown",
    "request_repeat",
    "request_menu",
];

#[derive(Debug, Clone)]
pub struct IntentRule {
    pub label: IntentLabel,
    pub patterns: Vec<Regex>,
}

#[derive(Deserialize)]
struct RuleRecord {
    label: String,
    patterns: Vec<String>,
}

/// Ordered keyword/pattern rules; the first rule with a matching pattern wins.
///
/// Patterns are regular expressions over the normalized token string of the
/// whole turn and of each sentence, so `^` anchors at a sentence start.
#[derive(Debug, Clone)]
pub struct IntentClassifier {
    inventory: BTreeSet<String>,
    rules: Vec<IntentRule>,
}

impl IntentClassifier {
    pub fn load(inventory_path: &Path, rules_path: &Path) -> Result<Self, NluError> {
        let inv = fs::read_to_string(inventory_path).map_err(|e| NluError::resource(inventory_path, e))?;
        let inventory: BTreeSet<String> = inv
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with("//"))
            .map(str::to_string)
            .collect();
        let body = fs::read_to_string(rules_path).map_err(|e| NluError::resource(rules_path, e))?;
        let mut rules = Vec::new();
        for (n, line) in body.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: RuleRecord = serde_json::from_str(line)
                .map_err(|e| NluError::resource(rules_path, format!("line {}: {e}", n + 1)))?;
            let patterns = rec
                .patterns
                .iter()
                .map(|p| Regex::new(p))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| NluError::resource(rules_path, format!("line {}: {e}", n + 1)))?;
            rules.push(IntentRule {
                label: IntentLabel::new(rec.label),
                patterns,
            });
        }
        Self::new(inventory, rules).map_err(|msg| NluError::resource(rules_path, msg))
    }

    pub fn new(inventory: BTreeSet<String>, rules: Vec<IntentRule>) -> Result<Self, String> {
        if inventory.len() < 8 {
            return Err(format!("intent inventory has {} labels, need at least 8", inventory.len()));
        }
        if !inventory.contains(IntentLabel::UNKNOWN) {
            return Err("intent inventory must contain `unknown`".into());
        }
        if let Some(bad) = rules.iter().find(|r| !inventory.contains(r.label.as_str())) {
            return Err(format!("rule label `{}` is not in the inventory", bad.label));
        }
        Ok(IntentClassifier { inventory, rules })
    }

    pub fn inventory(&self) -> &BTreeSet<String> {
        &self.inventory
    }

    pub fn rules(&self) -> &[IntentRule] {
        &self.rules
    }

    /// Context-free: depends only on `raw`.
    pub fn classify(&self, raw: &str) -> IntentLabel {
        let mut views = vec![text::tokenize(raw).join(" ")];
        let sentences = text::sentences(raw);
        if sentences.len() > 1 {
            views.extend(sentences.iter().map(|s| text::tokenize(s).join(" ")));
        }
        for rule in &self.rules {
            if rule.patterns.iter().any(|p| views.iter().any(|v| p.is_match(v))) {
                return rule.label.clone();
            }
        }
        IntentLabel::unknown()
    }
}
