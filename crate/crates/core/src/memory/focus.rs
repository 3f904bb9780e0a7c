use serde::{Deserialize, Serialize};

use super::SessionState;
use crate::kg::EntityId;
use crate::nlu::AnnotatedUtterance;

const THIRD_PERSON: &[&str] = &[
    "it", "it's", "its", "itself", "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "they", "them", "their", "theirs", "themselves",
];

pub fn is_third_person_pronoun(token: &str) -> bool {
    THIRD_PERSON.contains(&token)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusEntry {
    pub entity: EntityId,
    /// Turn count at the most recent mention.
    pub last_turn: u32,
}

/// Recently mentioned entities, most recent first, without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FocusStack {
    entries: Vec<FocusEntry>,
}

impl FocusStack {
    pub fn push(&mut self, entity: EntityId, turn: u32) {
        self.entries.retain(|e| e.entity != entity);
        self.entries.insert(0, FocusEntry { entity, last_turn: turn });
    }

    pub fn top(&self) -> Option<&EntityId> {
        self.entries.first().map(|e| &e.entity)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, entity: &EntityId) -> bool {
        self.entries.iter().any(|e| &e.entity == entity)
    }

    pub fn entries(&self) -> &[FocusEntry] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &EntityId> {
        self.entries.iter().map(|e| &e.entity)
    }

    pub(super) fn drain_older(&mut self, now: u32, threshold: u32) -> Vec<FocusEntry> {
        let (old, keep): (Vec<_>, Vec<_>) = std::mem::take(&mut self.entries)
            .into_iter()
            .partition(|e| now.saturating_sub(e.last_turn) >= threshold);
        self.entries = keep;
        old
    }
}

/// Top of the focus stack when the utterance carries a referring
/// third-person pronoun. Expletive "it" ("how is it that ...") does not refer.
pub fn resolve_focus(state: &SessionState, utterance: &AnnotatedUtterance) -> Option<EntityId> {
    let tokens = &utterance.tokens;
    let refers = tokens.iter().enumerate().any(|(i, t)| {
        is_third_person_pronoun(t) && !(t == "it" && tokens.get(i + 1).is_some_and(|n| n == "that"))
    });
    if refers {
        state.focus.top().cloned()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flush_uses_age_at_least_threshold() {
        let mut f = FocusStack::default();
        f.push("old".into(), 0);
        f.push("new".into(), 19);
        let dropped = f.drain_older(20, 10);
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].entity.as_str(), "old");
        assert_eq!(f.top().unwrap().as_str(), "new");
        assert_eq!(f.drain_older(20, 0).len(), 1);
        assert!(f.is_empty());
    }
}
