mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    drdm_core::http::router(Arc::new(common::engine()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

#[tokio::test]
async fn health_reports_loaded_resources() {
    let (status, body) = call(&app(), "GET", "/v1/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["flows"], 42);
    assert!(body["entities"].as_u64().unwrap() > 0);
    assert!(body["content_items"].as_u64().unwrap() > 0);
}

#[tokio::test]
async fn full_session_round_trip() {
    let app = app();
    let (status, created) = call(&app, "POST", "/v1/sessions", Some(json!({"seed": 7}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["seed"], 7);
    let id = created["session_id"].as_str().unwrap().to_string();

    let (status, turn) = call(&app, "POST", &format!("/v1/sessions/{id}/turns"), Some(json!({"text": "let's talk about travel"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(turn["reply"]["text"], "Are you planning on going on any trips soon?");
    assert!(turn["reply"]["ssml"].as_str().unwrap().starts_with("<speak>"));
    assert_eq!(turn["ended"], false);
    let winner = turn["debug"]["winner"].as_u64().unwrap() as usize;
    assert_eq!(turn["debug"]["pool"][winner]["source"], "flow:travel");

    let (status, asr) = call(
        &app,
        "POST",
        &format!("/v1/sessions/{id}/turns"),
        Some(json!({"asr_hypotheses": [{"text": "yes we are going to paris", "score": 0.9}]})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!(asr["reply"]["text"].as_str().unwrap().contains("Paris"));

    let (status, info) = call(&app, "GET", &format!("/v1/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(info["turns"], 2);
    assert_eq!(info["transcript"].as_array().unwrap().len(), 4);

    let (status, ended) = call(&app, "DELETE", &format!("/v1/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ended["ended"], true);

    let (status, err) = call(&app, "POST", &format!("/v1/sessions/{id}/turns"), Some(json!({"text": "hi"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"], "session_ended");
}

#[tokio::test]
async fn session_without_body_gets_a_seed() {
    let (status, created) = call(&app(), "POST", "/v1/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
    assert!(created["seed"].is_u64());
}

#[tokio::test]
async fn unknown_session_is_404() {
    let app = app();
    let (status, err) = call(&app, "GET", "/v1/sessions/missing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["error"], "unknown_session");
    let (status, _) = call(&app, "POST", "/v1/sessions/missing/turns", Some(json!({"text": "hi"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn bad_turn_bodies_are_400() {
    let app = app();
    let (_, created) = call(&app, "POST", "/v1/sessions", Some(json!({}))).await;
    let uri = format!("/v1/sessions/{}/turns", created["session_id"].as_str().unwrap());
    for body in [json!({}), json!({"text": "  "}), json!({"asr_hypotheses": []}), json!({"text": 5})] {
        let (status, err) = call(&app, "POST", &uri, Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(err["error"], "invalid_input");
    }
    let (status, _) = call(&app, "POST", "/v1/sessions", Some(json!({"seed": "x"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}
