mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use drdm_core::config::EngineConfig;
use drdm_core::engine::{Engine, EngineError};
use drdm_core::memory::ArchiveRecord;
use drdm_core::nlu::{AsrHypothesis, TurnInput};
use drdm_core::postprocess::strip_tags;

#[test]
fn every_fixture_script_passes() {
    let engine = common::engine();
    for path in common::script_paths() {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let t = common::run_fixture_script(&engine, &name, 7);
        assert!(t.passed(), "{name}: {:?}\n{}", t.failures, t.render());
    }
}

#[test]
fn endurance_run_never_repeats_or_goes_silent() {
    let engine = common::engine();
    let t = common::run_fixture_script(&engine, "endurance", 7);
    assert_eq!(t.debug.len(), 20);
    let mut seen = BTreeSet::new();
    for d in &t.debug {
        let w = &d.pool[d.winner];
        assert!(seen.insert(w.prompt_id.clone()), "prompt {} repeated", w.prompt_id);
    }
    for line in t.lines.iter().filter(|l| l.starts_with("BOT")) {
        let (_, text) = line.split_once("]: ").unwrap();
        assert!(!text.trim().is_empty(), "empty reply in `{line}`");
    }
}

#[test]
fn simulate_suite_is_reproducible_per_seed() {
    let a = common::simulate_suite(&common::engine(), 7);
    let b = common::simulate_suite(&common::engine(), 7);
    assert_eq!(a, b);
}

#[test]
fn spoken_form_strips_back_to_display_text() {
    let engine = common::engine();
    let s = engine.create_session(Some(7)).unwrap().session_id;
    let mut checked = 0;
    for text in ["tell me a story", "yes", "yes", "yes", "hello", "what do you think of watchmen"] {
        let r = engine.say(&s, text).unwrap();
        assert_eq!(strip_tags(&r.reply.ssml_text), r.reply.display_text, "turn `{text}`");
        assert!(r.reply.ssml_text.starts_with("<speak>"));
        checked += usize::from(r.reply.ssml_text.contains("<break") || r.reply.ssml_text.contains("<emphasis>"));
    }
    assert!(checked >= 1, "no reply carried speech markup");
}

#[test]
fn turns_stay_under_the_latency_budget() {
    let engine = common::engine();
    let s = engine.create_session(Some(11)).unwrap().session_id;
    let lines = std::fs::read_to_string(common::fixtures().join("scripts/endurance.script")).unwrap();
    let mut slowest = Duration::ZERO;
    for line in lines.lines().filter_map(|l| l.strip_prefix("user: ")) {
        let start = Instant::now();
        engine.say(&s, line).unwrap();
        slowest = slowest.max(start.elapsed());
    }
    assert!(slowest < Duration::from_millis(200), "slowest turn took {slowest:?}");
}

#[test]
fn pool_always_has_a_winner_and_text() {
    let engine = common::engine();
    let s = engine.create_session(Some(3)).unwrap().session_id;
    for text in ["", "?", "asdf qwer zxcv", "why", "no", "you", "shit", "the the the", "12345", "play music"] {
        match engine.say(&s, text) {
            Ok(r) => {
                assert!(!r.reply.display_text.trim().is_empty(), "empty reply to `{text}`");
                assert!(r.debug.winner < r.debug.pool.len());
            }
            Err(EngineError::Input(_)) => assert!(!text.chars().any(char::is_alphanumeric), "`{text}` rejected"),
            Err(e) => panic!("`{text}`: {e}"),
        }
    }
}

#[test]
fn profane_input_never_echoes_profanity() {
    let engine = common::engine();
    let s = engine.create_session(Some(5)).unwrap().session_id;
    let r = engine.say(&s, "you are a damn idiot").unwrap();
    assert!(!r.reply.display_text.to_lowercase().contains("damn"));
}

#[test]
fn low_confidence_asr_asks_for_clarification() {
    let engine = common::engine();
    let s = engine.create_session(Some(7)).unwrap().session_id;
    let input = TurnInput {
        text: None,
        asr_hypotheses: Some(vec![AsrHypothesis { text: "play some music".into(), score: 0.2 }]),
    };
    let r = engine.handle_turn(&s, &input).unwrap();
    assert!(r.reply.display_text.contains("didn't quite catch"));
}

#[test]
fn session_lifecycle_errors() {
    let engine = common::engine();
    assert!(matches!(engine.say("nope", "hi"), Err(EngineError::UnknownSession(_))));
    let s = engine.create_session(Some(1)).unwrap().session_id;
    assert!(matches!(engine.say(&s, "   "), Err(EngineError::Input(_))));
    engine.say(&s, "hello").unwrap();
    let info = engine.end_session(&s).unwrap();
    assert!(info.ended);
    assert_eq!(info.turns, 1);
    assert_eq!(info.transcript.len(), 2);
    assert!(matches!(engine.say(&s, "hi again"), Err(EngineError::SessionEnded(_))));
    let summaries = engine
        .archive()
        .records(&s)
        .into_iter()
        .filter(|r| matches!(r, ArchiveRecord::SessionSummary { .. }))
        .count();
    assert_eq!(summaries, 1);
    engine.end_session(&s).unwrap();
    assert_eq!(engine.archive().records(&s).len(), 1, "ending twice archives once");
}

#[test]
fn exit_request_ends_the_session() {
    let engine = common::engine();
    let s = engine.create_session(Some(1)).unwrap().session_id;
    let r = engine.say(&s, "can we stop talking right now").unwrap();
    assert!(r.ended);
    assert!(engine.session_info(&s).unwrap().ended);
}

#[test]
fn archive_writes_session_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = EngineConfig::default();
    config.paths.archive_dir = Some(dir.path().to_path_buf());
    let engine = Engine::from_config(config).unwrap();
    let s = engine.create_session(Some(2)).unwrap().session_id;
    engine.say(&s, "hello").unwrap();
    engine.end_session(&s).unwrap();
    let body = std::fs::read_to_string(dir.path().join(format!("{s}.jsonl"))).unwrap();
    assert!(body.contains("session_summary"));
}

#[test]
fn sessions_run_concurrently_without_interference() {
    let engine = Arc::new(common::engine());
    let solo = {
        let s = engine.create_session(Some(9)).unwrap().session_id;
        ["let's talk about travel", "yes, we are planning to go to Paris"]
            .map(|t| engine.say(&s, t).unwrap().reply.display_text)
    };
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let engine = Arc::clone(&engine);
            std::thread::spawn(move || {
                let s = engine.create_session(Some(9)).unwrap().session_id;
                ["let's talk about travel", "yes, we are planning to go to Paris"]
                    .map(|t| engine.say(&s, t).unwrap().reply.display_text)
            })
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), solo);
    }
}
