use crate::candidate::MergeRole;
use crate::ranker::RankedPool;

/// Index of the question to append to the winner, if the winner is a
/// statement and some question of at least `min_confidence` shares an
/// entity or the topic with it. Equal scores go to the earlier entry.
pub fn merge_partner(pool: &RankedPool, min_confidence: f64) -> Option<usize> {
    let winner = &pool.winner().candidate;
    if winner.mergeable_role != MergeRole::Statement {
        return None;
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in pool.entries.iter().enumerate() {
        let c = &e.candidate;
        if i == pool.winner || !e.valid || c.mergeable_role != MergeRole::Question || c.priority {
            continue;
        }
        if e.final_confidence < min_confidence || c.source_module == winner.source_module && c.text == winner.text {
            continue;
        }
        let shares_entity = c.entities.iter().any(|id| winner.entities.contains(id));
        let shares_topic = c.topic.is_some() && c.topic == winner.topic;
        if !(shares_entity || shares_topic) {
            continue;
        }
        if best.is_none_or(|(_, s)| e.final_confidence > s) {
            best = Some((i, e.final_confidence));
        }
    }
    best.map(|(i, _)| i)
}

/// Statement followed by the question.
pub fn merge(statement: &str, question: &str) -> String {
    format!("{} {}", statement.trim_end(), question.trim_start())
}
