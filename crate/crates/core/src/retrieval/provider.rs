use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde::Serialize;

use super::{ContentIndex, ContentKind, RetrievalQuery};
use crate::kg::EntityId;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Answer {
    pub text: String,
    /// Entities the answer is about, most specific first.
    pub entities: Vec<EntityId>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ProviderError {
    #[error("provider `{0}` timed out")]
    Timeout(String),
    #[error("provider `{name}` failed: {msg}")]
    Failed { name: String, msg: String },
}

/// A question-answering backend. Implementations must be cheap to call from
/// a worker thread.
pub trait SearchProvider: Send + Sync {
    fn name(&self) -> &str;
    fn answer(&self, question: &str) -> Result<Option<Answer>, ProviderError>;
}

#[derive(Debug, Clone, Serialize)]
pub struct CascadeOutcome {
    pub answer: Option<Answer>,
    /// Index of the provider that answered.
    pub provider_index: Option<usize>,
    /// `(provider name, reason)` for every provider tried before the winner.
    pub failures: Vec<(String, String)>,
}

/// Queries providers in order; the first non-empty answer wins. Errors,
/// empty answers and timeouts all count as failures and the cascade moves on.
pub fn search_provider_cascade(
    question: &str,
    providers: &[Arc<dyn SearchProvider>],
    timeout: Duration,
) -> CascadeOutcome {
    let mut failures = Vec::new();
    for (i, provider) in providers.iter().enumerate() {
        let (tx, rx) = mpsc::channel();
        let worker = Arc::clone(provider);
        let q = question.to_string();
        thread::spawn(move || {
            let _ = tx.send(worker.answer(&q));
        });
        let outcome = rx
            .recv_timeout(timeout)
            .unwrap_or_else(|_| Err(ProviderError::Timeout(provider.name().to_string())));
        match outcome {
            Ok(Some(a)) if !a.text.trim().is_empty() => {
                return CascadeOutcome { answer: Some(a), provider_index: Some(i), failures };
            }
            Ok(_) => failures.push((provider.name().to_string(), "no answer".into())),
            Err(e) => {
                tracing::debug!(provider = provider.name(), error = %e, "provider failed");
                failures.push((provider.name().to_string(), e.to_string()));
            }
        }
    }
    CascadeOutcome { answer: None, provider_index: None, failures }
}

/// Answers from fact items in the long-term content store.
#[derive(Debug, Clone)]
pub struct OfflineProvider {
    index: Arc<ContentIndex>,
    min_score: f64,
}

impl OfflineProvider {
    pub fn new(index: Arc<ContentIndex>, min_score: f64) -> Self {
        OfflineProvider { index, min_score }
    }
}

impl SearchProvider for OfflineProvider {
    fn name(&self) -> &str {
        "offline"
    }

    fn answer(&self, question: &str) -> Result<Option<Answer>, ProviderError> {
        let q = RetrievalQuery::terms(question).kinds(&[ContentKind::Fact]).limit(1);
        Ok(self
            .index
            .search(&q)
            .into_iter()
            .find(|hit| hit.score >= self.min_score)
            .map(|hit| Answer {
                text: hit.item.text.clone(),
                entities: hit.item.entities.clone(),
            }))
    }
}
