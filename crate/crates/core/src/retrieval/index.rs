use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::{ContentItem, ContentKind};
use crate::kg::{DiscourseRelation, EntityId};
use crate::nlu::{DialogueAct, WordSet};
use crate::text;

/// Retrieval request. Gates are exact-match filters; `terms` drives scoring.
#[derive(Debug, Clone, Default)]
pub struct RetrievalQuery {
    pub terms: Option<String>,
    pub topic: Option<String>,
    pub entity: Option<EntityId>,
    pub dialogue_act: Option<DialogueAct>,
    pub discourse_relation: Option<DiscourseRelation>,
    pub kinds: Vec<ContentKind>,
    pub exclude_ids: BTreeSet<String>,
    pub max_results: usize,
}

impl RetrievalQuery {
    pub fn terms(text: impl Into<String>) -> Self {
        RetrievalQuery {
            terms: Some(text.into()),
            max_results: 10,
            ..Default::default()
        }
    }

    pub fn topic(topic: impl Into<String>) -> Self {
        RetrievalQuery {
            topic: Some(topic.into()),
            max_results: 10,
            ..Default::default()
        }
    }

    pub fn entity(entity: EntityId) -> Self {
        RetrievalQuery {
            entity: Some(entity),
            max_results: 10,
            ..Default::default()
        }
    }

    pub fn kinds(mut self, kinds: &[ContentKind]) -> Self {
        self.kinds = kinds.to_vec();
        self
    }

    pub fn act(mut self, act: DialogueAct) -> Self {
        self.dialogue_act = Some(act);
        self
    }

    pub fn limit(mut self, n: usize) -> Self {
        self.max_results = n;
        self
    }

    pub fn excluding<I: IntoIterator<Item = String>>(mut self, ids: I) -> Self {
        self.exclude_ids.extend(ids);
        self
    }

    pub fn with_topic(mut self, topic: impl Into<String>) -> Self {
        self.topic = Some(topic.into());
        self
    }

    pub fn with_entity(mut self, entity: EntityId) -> Self {
        self.entity = Some(entity);
        self
    }

    /// At least one of terms, topic or entity must be present.
    pub fn is_valid(&self) -> bool {
        self.terms.as_deref().is_some_and(|t| !t.trim().is_empty())
            || self.topic.is_some()
            || self.entity.is_some()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoredItem<'a> {
    pub item: &'a ContentItem,
    pub score: f64,
}

/// Inverted index with cosine-normalized TF-IDF weights. Unsafe items are
/// dropped at build time and can never be returned.
#[derive(Debug, Clone, Default)]
pub struct ContentIndex {
    items: Vec<ContentItem>,
    by_id: HashMap<String, usize>,
    /// term → (doc, normalized weight)
    postings: HashMap<String, Vec<(usize, f64)>>,
    idf: HashMap<String, f64>,
    stopwords: WordSet,
}

impl ContentIndex {
    pub fn build(items: Vec<ContentItem>, stopwords: WordSet) -> Self {
        let mut items: Vec<ContentItem> = items.into_iter().filter(|i| i.safe).collect();
        items.sort_by(|a, b| a.id.cmp(&b.id));
        items.dedup_by(|a, b| a.id == b.id);
        let mut idx = ContentIndex {
            by_id: items.iter().enumerate().map(|(i, it)| (it.id.clone(), i)).collect(),
            items,
            postings: HashMap::new(),
            idf: HashMap::new(),
            stopwords,
        };
        let doc_terms: Vec<BTreeMap<String, f64>> = idx
            .items
            .iter()
            .map(|it| {
                let mut tf = BTreeMap::new();
                for t in idx.terms_of(&it.text) {
                    *tf.entry(t).or_insert(0.0) += 1.0;
                }
                tf
            })
            .collect();
        let n = idx.items.len() as f64;
        let mut df: HashMap<&str, f64> = HashMap::new();
        for tf in &doc_terms {
            for t in tf.keys() {
                *df.entry(t).or_insert(0.0) += 1.0;
            }
        }
        let idf: HashMap<String, f64> = df
            .iter()
            .map(|(t, d)| (t.to_string(), ((n + 1.0) / (d + 1.0)).ln() + 1.0))
            .collect();
        for (doc, tf) in doc_terms.iter().enumerate() {
            let weights: Vec<(&String, f64)> = tf.iter().map(|(t, f)| (t, f * idf[t])).collect();
            let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            for (t, w) in weights {
                idx.postings.entry(t.clone()).or_default().push((doc, w / norm));
            }
        }
        idx.idf = idf;
        idx
    }

    /// Content-word index terms of a text.
    pub fn terms_of(&self, text: &str) -> Vec<String> {
        text::tokenize(text)
            .iter()
            .map(|t| text::term(t).to_string())
            .filter(|t| !self.stopwords.contains(t) && t.chars().any(char::is_alphanumeric))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ContentItem> {
        self.by_id.get(id).map(|&i| &self.items[i])
    }

    pub fn items(&self) -> impl Iterator<Item = &ContentItem> {
        self.items.iter()
    }

    fn passes(&self, item: &ContentItem, q: &RetrievalQuery) -> bool {
        q.topic.as_ref().is_none_or(|t| &item.topic == t)
            && q.entity.as_ref().is_none_or(|e| item.entities.contains(e))
            && q.dialogue_act.is_none_or(|a| item.dialogue_act == a)
            && q.discourse_relation.is_none_or(|r| item.discourse_relation == Some(r))
            && (q.kinds.is_empty() || q.kinds.contains(&item.kind))
            && !q.exclude_ids.contains(&item.id)
    }

    /// Ranked results. Without terms every gated item scores 1.0; with terms
    /// only items sharing at least one term are returned. Ties go to the
    /// smaller id.
    pub fn search(&self, q: &RetrievalQuery) -> Vec<ScoredItem<'_>> {
        if !q.is_valid() {
            return Vec::new();
        }
        let query_terms = q.terms.as_deref().map(|t| self.terms_of(t)).unwrap_or_default();
        let mut scored: Vec<(usize, f64)> = if query_terms.is_empty() {
            (0..self.items.len()).map(|i| (i, 1.0)).collect()
        } else {
            let mut qtf: BTreeMap<&str, f64> = BTreeMap::new();
            for t in &query_terms {
                *qtf.entry(t).or_insert(0.0) += 1.0;
            }
            let qw: Vec<(&str, f64)> = qtf
                .iter()
                .filter_map(|(t, f)| self.idf.get(*t).map(|idf| (*t, f * idf)))
                .collect();
            let qnorm = qw.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            if qnorm > 0.0 {
                for (t, w) in &qw {
                    for &(doc, dw) in &self.postings[*t] {
                        *acc.entry(doc).or_insert(0.0) += dw * w / qnorm;
                    }
                }
            }
            acc.into_iter().collect()
        };
        scored.retain(|&(i, _)| self.passes(&self.items[i], q));
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(self.items[a.0].id.cmp(&self.items[b.0].id)));
        scored.truncate(q.max_results);
        scored
            .into_iter()
            .map(|(i, score)| ScoredItem { item: &self.items[i], score })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(id: &str, text: &str, topic: &str) -> ContentItem {
        ContentItem {
            id: id.into(),
            text: text.into(),
            kind: ContentKind::Fact,
            topic: topic.into(),
            entities: vec![],
            dialogue_act: DialogueAct::Statement,
            discourse_relation: None,
            intimacy_level: None,
            safe: true,
            source: "test".into(),
            agent_answer: None,
        }
    }

    #[test]
    fn unsafe_items_never_indexed() {
        let mut bad = item("b", "cats purr", "animals");
        bad.safe = false;
        let idx = ContentIndex::build(vec![item("a", "cats purr", "animals"), bad], WordSet::default());
        let hits = idx.search(&RetrievalQuery::terms("cats"));
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].item.id, "a");
    }

    #[test]
    fn query_without_gates_or_terms_is_empty() {
        let idx = ContentIndex::build(vec![item("a", "x", "t")], WordSet::default());
        assert!(idx.search(&RetrievalQuery::default()).is_empty());
    }

    #[test]
    fn self_retrieval_ranks_first() {
        let idx = ContentIndex::build(
            vec![
                item("a", "the reef is the largest living structure", "science"),
                item("b", "bacteria outnumber human cells", "science"),
                item("c", "the largest planet is jupiter", "science"),
            ],
            WordSet::from_words(["the", "is"]),
        );
        let hits = idx.search(&RetrievalQuery::terms("the reef is the largest living structure"));
        assert_eq!(hits[0].item.id, "a");
    }
}
