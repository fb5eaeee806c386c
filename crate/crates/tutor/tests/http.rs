use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use tutor::http::router;
use tutor_core::session::{Library, SessionManager};

fn app() -> Router {
    router(Arc::new(SessionManager::new(Library::bundled())))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn new_session(app: &Router, exercise: &str) -> String {
    let (status, v) = call(app, "POST", "/sessions", Some(json!({ "exercise": exercise }))).await;
    assert_eq!(status, StatusCode::CREATED);
    v["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn create_session_returns_initial_state() {
    let app = app();
    let (status, v) = call(&app, "POST", "/sessions", Some(json!({ "exercise": "rel-inv-comp" }))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["state"]["sequents"], json!(["T0: |- inv(comp(R,S)) = comp(inv(S),inv(R))"]));
    assert_eq!(v["state"]["marked"], 0);
    assert_eq!(v["state"]["proof_complete"], false);
    assert_eq!(v["session_id"], v["state"]["session_id"]);
}

#[tokio::test]
async fn unknown_exercise_and_session_are_not_found() {
    let app = app();
    let (status, v) = call(&app, "POST", "/sessions", Some(json!({ "exercise": "nope" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(v["error"].as_str().unwrap().contains("nope"));
    let (status, _) = call(&app, "GET", "/sessions/zzz", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/sessions/zzz/hint", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn steps_report_the_feedback_vector() {
    let app = app();
    let id = new_session(&app, "rel-inv-comp").await;
    let uri = format!("/sessions/{id}/steps");
    let (status, v) = call(&app, "POST", &uri, Some(json!({ "text": "let (x,y) in inv(comp(R,S))" }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["feedback"], json!({ "soundness": "correct", "granularity": "appropriate", "relevance": "relevant" }));
    assert_eq!(v["messages"], json!(["correct"]));
    assert_eq!(v["interpretations"], 1);
    assert_eq!(v["proof_complete"], false);

    let (_, v) = call(&app, "POST", &uri, Some(json!({ "text": "hence (y,x) in comp(S,R)" }))).await;
    assert_eq!(v["feedback"]["soundness"], "buggy");
    assert_eq!(v["feedback"]["granularity"], "not_applicable");
    assert_eq!(v["feedback"]["relevance"], "unknown");
    assert_eq!(v["messages"], json!(["incorrect: inverse reverses the order of composition"]));

    let (_, v) = call(&app, "POST", &uri, Some(json!({ "text": "hence ((" }))).await;
    assert_eq!(v["feedback"]["soundness"], "unknown");

    let (_, state) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    let transcript = state["transcript"].as_array().unwrap();
    assert_eq!(transcript.len(), 3);
    assert_eq!(transcript[0]["kind"], "step");
    assert_eq!(transcript[0]["text"], "let (x,y) in inv(comp(R,S))");
    assert_eq!(
        state["sequents"],
        json!([
            "T3: (x,y) in inv(comp(R,S)) |- (x,y) in comp(inv(S),inv(R))",
            "T2: |- inv(comp(R,S)) supset comp(inv(S),inv(R))"
        ])
    );
}

#[tokio::test]
async fn hints_climb_the_ladder() {
    let app = app();
    let id = new_session(&app, "rel-inv-comp").await;
    let step = json!({ "text": "subgoal inv(comp(R,S)) subset comp(inv(S),inv(R))" });
    call(&app, "POST", &format!("/sessions/{id}/steps"), Some(step)).await;
    let mut got = Vec::new();
    for _ in 0..4 {
        let (status, v) = call(&app, "POST", &format!("/sessions/{id}/hint"), None).await;
        assert_eq!(status, StatusCode::OK);
        got.push((v["category"].as_u64().unwrap(), v["text"].as_str().unwrap().to_string()));
    }
    assert_eq!(
        got,
        vec![
            (1, "Try to work backward from the goal".to_string()),
            (3, "Try to apply Def ⊂".to_string()),
            (5, "Try to apply Def ⊂ on (R∘S)⁻¹ ⊂ S⁻¹∘R⁻¹".to_string()),
            (7, "By the application of Def ⊂ we obtain the new goal (x,y) ∈ (R∘S)⁻¹ ⇒ (x,y) ∈ S⁻¹∘R⁻¹".to_string()),
        ]
    );
    let (_, state) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(state["transcript"].as_array().unwrap().iter().filter(|e| e["kind"] == "hint").count(), 4);
}

#[tokio::test]
async fn exercises_and_theories_are_listed() {
    let app = app();
    let (status, v) = call(&app, "GET", "/exercises", None).await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["rel-inv-comp", "rel-union-comp"]);
    assert_eq!(v[0]["goal"], "inv(comp(R,S)) = comp(inv(S),inv(R))");

    let (status, v) = call(&app, "GET", "/theories/relations", None).await;
    assert_eq!(status, StatusCode::OK);
    let labels: Vec<&str> = v["assertions"].as_array().unwrap().iter().map(|a| a["label"].as_str().unwrap()).collect();
    assert!(labels.contains(&"Def-subset"));
    assert!(v["strategies"].as_array().unwrap().contains(&json!("close-by-definition")));
    let (status, _) = call(&app, "GET", "/theories/geometry", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn malformed_request_body_is_a_client_error() {
    let app = app();
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({ "exercize": 3 }))).await;
    assert!(status.is_client_error());
}
