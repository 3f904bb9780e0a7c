//! Pool arbitration: context score, loss, priority bypass, argmax with
//! random tie-breaking and the out-of-domain gate.
//!
//! Final confidence of a candidate is
//! `clamp(min(max(context, confidence) - loss, 1), 0, 1)` with
//! `loss = incoherence + repeat + sentLen`.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::candidate::{Initiative, ModuleId, PromptId, ResponseCandidate};
use crate::kg::EntityId;
use crate::nlu::{check_profanity, WordSet};
use crate::text;

/// Ranker constants, all overridable from the engine config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RankerConfig {
    pub base_confidence: f64,
    pub incoherence_penalty: f64,
    pub repeat_penalty: f64,
    pub length_penalty_rate: f64,
    pub length_threshold: usize,
    pub ood_threshold: f64,
    pub content_word_weight: f64,
    pub entity_weight: f64,
    pub state_var_weight: f64,
}

impl Default for RankerConfig {
    fn default() -> Self {
        RankerConfig {
            base_confidence: 0.6,
            incoherence_penalty: 0.15,
            repeat_penalty: 0.05,
            length_penalty_rate: 0.01,
            length_threshold: 30,
            ood_threshold: 0.8,
            content_word_weight: 0.1,
            entity_weight: 0.2,
            state_var_weight: 0.1,
        }
    }
}

impl RankerConfig {
    pub fn validate(&self) -> Result<(), String> {
        let penalties = [
            ("incoherence_penalty", self.incoherence_penalty),
            ("repeat_penalty", self.repeat_penalty),
            ("length_penalty_rate", self.length_penalty_rate),
            ("content_word_weight", self.content_word_weight),
            ("entity_weight", self.entity_weight),
            ("state_var_weight", self.state_var_weight),
        ];
        if let Some((name, v)) = penalties.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(format!("ranker.{name} must be a finite value >= 0, got {v}"));
        }
        for (name, v) in [("base_confidence", self.base_confidence), ("ood_threshold", self.ood_threshold)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("ranker.{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

/// Per-turn inputs to scoring.
#[derive(Debug, Clone)]
pub struct RankingContext<'a> {
    pub config: &'a RankerConfig,
    pub active_module: Option<ModuleId>,
    pub surfaced_prompts: &'a BTreeSet<PromptId>,
    pub utterance_tokens: Vec<String>,
    pub content_words: Vec<String>,
    pub entities: Vec<EntityId>,
    /// The `current_topic` state variable, if set.
    pub current_topic: Option<String>,
    pub stopwords: &'a WordSet,
    pub profanity: &'a WordSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub incoherence: f64,
    pub repeat: f64,
    pub sent_len: f64,
}

impl LossBreakdown {
    pub fn total(&self) -> f64 {
        self.incoherence + self.repeat + self.sent_len
    }
}

/// 1.0 when one of the candidate's trigger phrases is in the utterance;
/// otherwise the base plus weighted overlap, capped at 1.
pub fn context_score(c: &ResponseCandidate, ctx: &RankingContext) -> f64 {
    if c.keywords
        .iter()
        .any(|k| text::contains_phrase(&ctx.utterance_tokens, &text::tokenize(k)))
    {
        return 1.0;
    }
    let cand_words: BTreeSet<String> = text::tokenize(&c.text)
        .iter()
        .map(|t| text::term(t).to_string())
        .filter(|t| !ctx.stopwords.contains(t) && t.chars().any(char::is_alphanumeric))
        .collect();
    let utt_words: BTreeSet<String> = ctx.content_words.iter().map(|t| text::term(t).to_string()).collect();
    let shared_words = cand_words.intersection(&utt_words).count() as f64;
    let shared_entities = c
        .entities
        .iter()
        .collect::<BTreeSet<_>>()
        .intersection(&ctx.entities.iter().collect())
        .count() as f64;
    let affinity = match (&c.topic, &ctx.current_topic) {
        (Some(a), Some(b)) if a == b => 1.0,
        _ => 0.0,
    };
    let cfg = ctx.config;
    let score = cfg.base_confidence
        + cfg.content_word_weight * shared_words
        + cfg.entity_weight * shared_entities
        + cfg.state_var_weight * affinity;
    score.clamp(0.0, 1.0)
}

pub fn loss(c: &ResponseCandidate, ctx: &RankingContext) -> LossBreakdown {
    let cfg = ctx.config;
    let incoherent = match &ctx.active_module {
        Some(active) if active.is_system_initiative() => {
            &c.source_module != active && c.on_behalf_of.as_ref() != Some(active)
        }
        _ => false,
    };
    let sent_len = if c.source_module.initiative() == Initiative::Mixed {
        cfg.length_penalty_rate * c.token_len().saturating_sub(cfg.length_threshold) as f64
    } else {
        0.0
    };
    LossBreakdown {
        incoherence: if incoherent { cfg.incoherence_penalty } else { 0.0 },
        repeat: if ctx.surfaced_prompts.contains(&c.prompt_id) { cfg.repeat_penalty } else { 0.0 },
        sent_len,
    }
}

/// The scoring equation with the lower clamp added.
pub fn final_confidence(context: f64, confidence: f64, loss: f64) -> f64 {
    (context.max(confidence) - loss).min(1.0).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub candidate: ResponseCandidate,
    pub context: f64,
    pub loss: LossBreakdown,
    pub final_confidence: f64,
    /// False when the sensitive-content filter removed the candidate.
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Priority,
    Argmax,
    OutOfDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPool {
    pub entries: Vec<RankedEntry>,
    pub winner: usize,
    pub selection: Selection,
    /// Number of candidates sharing the maximal score.
    pub tie_size: usize,
}

impl RankedPool {
    pub fn winner(&self) -> &RankedEntry {
        &self.entries[self.winner]
    }

    /// Highest final confidence among valid non-priority, non-fallback entries.
    pub fn max_confidence(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.valid && !e.candidate.priority && e.candidate.source_module != ModuleId::OutOfDomain)
            .map(|e| e.final_confidence)
            .max_by(f64::total_cmp)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RankError {
    #[error("no valid candidate and no out-of-domain fallback in the pool")]
    EmptyPool,
}

/// Ranks a pool. The out-of-domain candidate is never chosen by argmax; it
/// replaces the argmax winner when that winner is at or below the gate.
pub fn rank<R: Rng + ?Sized>(
    pool: Vec<ResponseCandidate>,
    ctx: &RankingContext,
    rng: &mut R,
) -> Result<RankedPool, RankError> {
    let entries: Vec<RankedEntry> = pool
        .into_iter()
        .map(|c| {
            let valid = c.safe && !check_profanity(&c.text, ctx.profanity);
            let context = context_score(&c, ctx);
            let loss = loss(&c, ctx);
            let final_confidence = final_confidence(context, c.confidence, loss.total());
            RankedEntry { candidate: c, context, loss, final_confidence, valid }
        })
        .collect();

    let priority = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.valid && e.candidate.priority)
        .max_by(|(ia, a), (ib, b)| a.candidate.priority_rank.cmp(&b.candidate.priority_rank).then(ib.cmp(ia)));
    if let Some((i, _)) = priority {
        return Ok(RankedPool { entries, winner: i, selection: Selection::Priority, tie_size: 1 });
    }

    let is_ood = |e: &RankedEntry| e.candidate.source_module == ModuleId::OutOfDomain;
    let ood = entries.iter().position(|e| e.valid && is_ood(e));
    let contenders: Vec<usize> = (0..entries.len())
        .filter(|&i| entries[i].valid && !is_ood(&entries[i]))
        .collect();
    let best = contenders
        .iter()
        .map(|&i| entries[i].final_confidence)
        .max_by(f64::total_cmp);

    let Some(best) = best else {
        return match ood {
            Some(i) => Ok(RankedPool { entries, winner: i, selection: Selection::OutOfDomain, tie_size: 0 }),
            None => Err(RankError::EmptyPool),
        };
    };
    let tied: Vec<usize> = contenders
        .into_iter()
        .filter(|&i| entries[i].final_confidence == best)
        .collect();
    let pick = if tied.len() > 1 { tied[rng.random_range(0..tied.len())] } else { tied[0] };
    let tie_size = tied.len();
    match ood {
        Some(i) if best <= ctx.config.ood_threshold => {
            Ok(RankedPool { entries, winner: i, selection: Selection::OutOfDomain, tie_size })
        }
        _ => Ok(RankedPool { entries, winner: pick, selection: Selection::Argmax, tie_size }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx<'a>(cfg: &'a RankerConfig, surfaced: &'a BTreeSet<PromptId>, words: &'a WordSet, utt: &str) -> RankingContext<'a> {
        let tokens = text::tokenize(utt);
        RankingContext {
            config: cfg,
            active_module: None,
            surfaced_prompts: surfaced,
            content_words: tokens.clone(),
            utterance_tokens: tokens,
            entities: vec![],
            current_topic: None,
            stopwords: words,
            profanity: words,
        }
    }

    #[test]
    fn trigger_keyword_gives_full_context() {
        let cfg = RankerConfig::default();
        let s = BTreeSet::new();
        let w = WordSet::default();
        let c = ResponseCandidate::new(ModuleId::flow("video_games"), "Do you play games?", 0.6)
            .keywords(["video games"]);
        assert_eq!(context_score(&c, &ctx(&cfg, &s, &w, "i like video games")), 1.0);
        assert_eq!(context_score(&c, &ctx(&cfg, &s, &w, "i like dogs")), 0.6);
    }

    #[test]
    fn lower_clamp_applies() {
        assert_eq!(final_confidence(0.0, 0.1, 0.5), 0.0);
        assert_eq!(final_confidence(1.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn priority_wins_over_everything() {
        let cfg = RankerConfig::default();
        let s = BTreeSet::new();
        let w = WordSet::default();
        let pool = vec![
            ResponseCandidate::new(ModuleId::Opinions, "x", 1.0),
            ResponseCandidate::new(ModuleId::Base, "bye", 0.0).priority(90),
        ];
        let r = rank(pool, &ctx(&cfg, &s, &w, "x"), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.selection, Selection::Priority);
        assert_eq!(r.winner().candidate.text, "bye");
    }
}
