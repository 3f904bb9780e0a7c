mod common;

use std::collections::BTreeMap;

use drdm_core::config::bundled_data_dir;
use drdm_core::retrieval::{ingest, ingest_file, FilterConfig, RejectRule};

fn filters() -> FilterConfig {
    let data = bundled_data_dir();
    FilterConfig::load(&data.join("nlu"), &data.join("ingest")).unwrap()
}

#[test]
fn adversarial_pack_matches_the_oracle() {
    let dir = common::fixtures().join("ingest");
    let report = ingest_file(&dir.join("adversarial.jsonl"), &filters()).unwrap();
    let oracle: BTreeMap<String, String> =
        serde_json::from_str(&std::fs::read_to_string(dir.join("oracle.json")).unwrap()).unwrap();
    assert_eq!(oracle.len(), 20);
    for r in &report.rejections {
        assert_eq!(oracle[&r.id], r.rule.as_str(), "{}", r.id);
    }
    for item in &report.accepted {
        assert_eq!(oracle[&item.id], "accept", "{}", item.id);
    }
    assert_eq!(report.accepted.len() + report.rejections.len(), 20);
}

#[test]
fn bundled_packs_pass_the_filters() {
    let dir = bundled_data_dir().join("content");
    let cfg = filters();
    for entry in std::fs::read_dir(dir).unwrap().flatten() {
        let report = ingest_file(&entry.path(), &cfg).unwrap();
        assert!(report.rejections.is_empty(), "{}: {:?}", entry.path().display(), report.rejections);
    }
}

#[test]
fn dialogue_turns_keep_their_anaphora() {
    let pack = r#"{"id": "d1", "text": "Did you like it?", "kind": "dialogue_turn", "topic": "movies"}
{"id": "f1", "text": "Did you like it?", "kind": "fact", "topic": "movies"}"#;
    let report = ingest(pack, &filters());
    assert_eq!(report.accepted.iter().map(|i| i.id.as_str()).collect::<Vec<_>>(), ["d1"]);
    assert_eq!(report.rejections[0].rule, RejectRule::Pronoun);
}

#[test]
fn ingestion_continues_past_bad_lines() {
    let pack = "not json\n{\"id\": \"x\", \"text\": \"Owls can turn their heads a long way.\", \"kind\": \"fact\", \"extra\": 1}\n{\"id\": \"ok\", \"text\": \"Owls can turn their heads a long way.\", \"kind\": \"fact\"}\n";
    let report = ingest(pack, &filters());
    assert_eq!(report.accepted.len(), 1);
    assert_eq!(report.rejections.len(), 2);
    assert!(report.rejections.iter().all(|r| r.rule == RejectRule::Malformed));
    assert_eq!(report.rejections[0].id, "line:1");
}
