mod common;

use std::path::Path;

use drdm_core::flow::{load_flow, load_flow_dir, load_flow_str, FunctionRegistry, ValidationRule};

#[test]
fn broken_fixtures_fail_with_their_rule() {
    let registry = FunctionRegistry::standard();
    let cases = [
        ("dangling_expects", ValidationRule::DanglingExpects),
        ("unreachable_node", ValidationRule::UnreachableNode),
        ("duplicate_id", ValidationRule::DuplicateId),
        ("unknown_function", ValidationRule::UnknownFunction),
        ("missing_entry", ValidationRule::MissingEntry),
    ];
    for (name, rule) in cases {
        let path = common::fixtures().join("broken_flows").join(format!("{name}.json"));
        let err = load_flow(&path, &registry).expect_err(name);
        assert_eq!(err.rule(), Some(rule), "{name}: {err}");
        assert_eq!(rule.as_str(), name);
    }
}

#[test]
fn shipped_flows_are_all_valid() {
    let registry = FunctionRegistry::standard();
    let dir = drdm_core::config::bundled_data_dir().join("flows");
    let results = load_flow_dir(&dir, &registry).unwrap();
    assert_eq!(results.len(), 42);
    for (path, r) in results {
        assert!(r.is_ok(), "{}: {:?}", path.display(), r.err());
    }
}

#[test]
fn sample_flow_loads_with_every_node_as_entry() {
    let flow = load_flow(&common::fixtures().join("flows/sample.json"), &FunctionRegistry::standard()).unwrap();
    assert_eq!(flow.node_ids().count(), 26);
    assert_eq!(flow.entry_expects.len(), 26);
}

#[test]
fn malformed_json_reports_a_parse_failure() {
    let err = load_flow_str("{ not json", Path::new("x.json"), &FunctionRegistry::standard()).unwrap_err();
    assert_eq!(err.rule(), Some(ValidationRule::Parse));
}

#[test]
fn unknown_template_slot_is_rejected() {
    let body = r#"{"id": "s", "topic": "s", "entry_expects": ["a"],
        "nodes": {"a": {"action": {"template": "Hello {nobody_knows}"}}}}"#;
    let err = load_flow_str(body, Path::new("s.json"), &FunctionRegistry::standard()).unwrap_err();
    assert_eq!(err.rule(), Some(ValidationRule::UnknownFunction));
}

#[test]
fn trace_survives_a_sidestep_into_another_branch() {
    let engine = common::sample_flow_engine();
    let s = engine.create_session(Some(7)).unwrap().session_id;
    let mut nodes = Vec::new();
    for text in ["Precondition A", "Precondition D"] {
        let flow = engine.say(&s, text).unwrap().debug.flow.unwrap();
        nodes.push((flow.node, flow.expects_after));
    }
    assert_eq!(nodes[0], (Some("A".into()), vec!["C".into(), "D".into()]));
    // D expects nothing further, so the flow ends after saying it.
    assert_eq!(nodes[1], (Some("D".into()), Vec::new()));
    let r = engine.say(&s, "Precondition C").unwrap();
    assert!(r.debug.flow.is_none() || r.debug.flow.unwrap().node.is_none());
}
