//! Shared helpers for the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use drdm_core::candidate::{ModuleId, PromptId, ResponseCandidate};
use drdm_core::config::EngineConfig;
use drdm_core::engine::{parse_script, run_script, Engine, Transcript};
use drdm_core::nlu::WordSet;
use drdm_core::ranker::{RankerConfig, RankingContext};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn engine() -> Engine {
    Engine::bundled().expect("bundled resources load")
}

/// Engine over the bundled data whose only flow is the sample fixture.
pub fn sample_flow_engine() -> Engine {
    let mut config = EngineConfig::default();
    config.paths.flow_dirs = vec![fixtures().join("flows")];
    Engine::from_config(config).expect("engine with fixture flows")
}

/// Script fixtures in name order.
pub fn script_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixtures().join("scripts"))
        .expect("scripts dir")
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "script"))
        .collect();
    paths.sort();
    paths
}

pub fn run_fixture_script(engine: &Engine, name: &str, seed: u64) -> Transcript {
    let path = fixtures().join("scripts").join(format!("{name}.script"));
    let body = std::fs::read_to_string(&path).expect("script readable");
    let script = parse_script(name, &body).expect("script parses");
    run_script(engine, &script, seed).expect("script runs")
}

/// Every script rendered back to back, the way the CLI prints them.
pub fn simulate_suite(engine: &Engine, seed: u64) -> String {
    let mut out = String::new();
    for path in script_paths() {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let body = std::fs::read_to_string(&path).unwrap();
        let script = parse_script(&name, &body).unwrap();
        out.push_str(&run_script(engine, &script, seed).unwrap().render());
    }
    out
}

/// Owns what a [`RankingContext`] borrows.
#[derive(Default)]
pub struct RankFixture {
    pub config: RankerConfig,
    pub surfaced: BTreeSet<PromptId>,
    pub stopwords: WordSet,
    pub profanity: WordSet,
}

impl RankFixture {
    pub fn ctx(&self, utterance: &str, active: Option<ModuleId>) -> RankingContext<'_> {
        let tokens: Vec<String> = utterance.split_whitespace().map(str::to_lowercase).collect();
        RankingContext {
            config: &self.config,
            active_module: active,
            surfaced_prompts: &self.surfaced,
            utterance_tokens: tokens.clone(),
            content_words: tokens,
            entities: Vec::new(),
            current_topic: None,
            stopwords: &self.stopwords,
            profanity: &self.profanity,
        }
    }
}

/// A candidate whose text shares no word with typical test utterances.
pub fn plain(module: ModuleId, id: &str, confidence: f64) -> ResponseCandidate {
    ResponseCandidate::new(module, format!("zzz {id}"), confidence).prompt(id)
}
