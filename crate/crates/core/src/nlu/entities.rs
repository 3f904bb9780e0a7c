use super::EntityMention;
use crate::kg::KnowledgeGraph;
use crate::text;

/// Gazetteer matching against entity names and aliases: case-insensitive,
/// left to right, longest match first. Returned spans never overlap.
pub fn detect_entities(tokens: &[String], graph: &KnowledgeGraph) -> Vec<EntityMention> {
    let gazetteer = graph.gazetteer();
    let max_len = gazetteer.max_len().min(tokens.len());
    let terms: Vec<&str> = tokens.iter().map(|t| text::term(t)).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut matched = None;
        for len in (1..=max_len.min(tokens.len() - i)).rev() {
            if let Some(id) = gazetteer.lookup(&terms[i..i + len]) {
                matched = Some((len, id.clone()));
                break;
            }
        }
        match matched {
            Some((len, entity_id)) => {
                let salience = (0.5 + 0.5 * len as f64 / tokens.len() as f64).min(1.0);
                out.push(EntityMention {
                    surface: tokens[i..i + len].join(" "),
                    entity_id,
                    span: (i, i + len),
                    salience,
                });
                i += len;
            }
            None => i += 1,
        }
    }
    out
}
