use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NluError, TopicLabel};
use crate::text;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicEntry {
    pub topic: TopicLabel,
    pub keywords: Vec<String>,
}

/// Keyword topic classifier. The longest matching keyword wins; ties go to
/// the entry declared first.
#[derive(Debug, Clone, Default)]
pub struct TopicClassifier {
    entries: Vec<(TopicLabel, Vec<Vec<String>>)>,
}

impl TopicClassifier {
    pub fn load(path: &Path) -> Result<Self, NluError> {
        let body = fs::read_to_string(path).map_err(|e| NluError::resource(path, e))?;
        let mut entries = Vec::new();
        for (n, line) in body.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e: TopicEntry = serde_json::from_str(line)
                .map_err(|err| NluError::resource(path, format!("line {}: {err}", n + 1)))?;
            entries.push(e);
        }
        Ok(Self::new(entries))
    }

    pub fn new(entries: Vec<TopicEntry>) -> Self {
        TopicClassifier {
            entries: entries
                .into_iter()
                .map(|e| (e.topic, e.keywords.iter().map(|k| text::tokenize(k)).collect()))
                .collect(),
        }
    }

    pub fn topics(&self) -> impl Iterator<Item = &TopicLabel> {
        self.entries.iter().map(|(t, _)| t)
    }

    pub fn classify(&self, tokens: &[String]) -> Option<TopicLabel> {
        let mut best: Option<(&TopicLabel, usize)> = None;
        for (topic, keywords) in &self.entries {
            for kw in keywords {
                if text::contains_phrase(tokens, kw) && best.is_none_or(|(_, len)| kw.len() > len) {
                    best = Some((topic, kw.len()));
                }
            }
        }
        best.map(|(t, _)| t.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_keyword_wins() {
        let c = TopicClassifier::new(vec![
            TopicEntry { topic: "games".into(), keywords: vec!["games".into()] },
            TopicEntry { topic: "video_games".into(), keywords: vec!["video games".into()] },
        ]);
        assert_eq!(c.classify(&text::tokenize("I like video games")).as_deref(), Some("video_games"));
        assert_eq!(c.classify(&text::tokenize("board games")).as_deref(), Some("games"));
        assert_eq!(c.classify(&text::tokenize("hello")), None);
    }
}
