use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use keepaway::game::{interception_time, GameConfig};
use keepaway::geometry::Point;
use keepaway_cli::http::router;
use keepaway_cli::session::SessionStore;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

fn app() -> Router {
    router(Arc::new(SessionStore::new()))
}

fn pentagon(k: f64, start: usize) -> Value {
    json!({"config": GameConfig::regular(5, 2, k), "seed": 3, "start": start})
}

fn error_code(v: &Value) -> &str {
    v["error"]["code"].as_str().unwrap()
}

#[tokio::test]
async fn create_poll_close() {
    let app = app();
    let mut created = Value::Null;
    // the entry formation may already block every lane out of some anchors
    for start in 0..5 {
        let (st, c) = call(&app, Method::POST, "/sessions", Some(pentagon(0.32, start))).await;
        assert_eq!(st, StatusCode::CREATED);
        if c["snapshot"]["status"] == "open" {
            created = c;
            break;
        }
    }
    assert_eq!(created["bundle"]["lanes"].as_array().unwrap().len(), 20);
    assert_eq!(created["bundle"]["slots"].as_array().unwrap().len(), 2);
    assert_eq!(created["bundle"]["verdict"], "pursuer_win");
    assert_eq!(created["snapshot"]["status"], "open");
    let id = created["session_id"].as_str().unwrap().to_string();

    let (st, snap) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(snap["session_id"], id.as_str());
    assert_eq!(snap["events"].as_array().unwrap().len(), 0, "start event was delivered on create");
    assert_eq!(snap["blocked"].as_array().unwrap().len(), 20);

    let (st, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::OK);
    let (st, err) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&err), "unknown_session");
}

#[tokio::test]
async fn bare_config_is_accepted() {
    let (st, created) = call(&app(), Method::POST, "/sessions", Some(json!(GameConfig::regular(4, 3, 0.3)))).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(created["bundle"]["anchors"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn error_codes() {
    let app = app();
    let (st, err) = call(&app, Method::POST, "/sessions", Some(json!({"config": {"m": 2}}))).await;
    assert_eq!((st, error_code(&err)), (StatusCode::BAD_REQUEST, "malformed_config"));
    let (st, err) = call(&app, Method::POST, "/sessions", Some(pentagon(0.32, 9))).await;
    assert_eq!((st, error_code(&err)), (StatusCode::BAD_REQUEST, "malformed_config"));
    let (st, err) = call(&app, Method::POST, "/sessions/nope/move", Some(json!({"target": 1}))).await;
    assert_eq!((st, error_code(&err)), (StatusCode::NOT_FOUND, "unknown_session"));
    let (st, err) = call(&app, Method::DELETE, "/sessions/nope", None).await;
    assert_eq!((st, error_code(&err)), (StatusCode::NOT_FOUND, "unknown_session"));

    let (_, created) = call(&app, Method::POST, "/sessions", Some(pentagon(0.25, 2))).await;
    let id = created["session_id"].as_str().unwrap();
    let mv = format!("/sessions/{id}/move");
    for body in [json!({"target": 2}), json!({"target": 7}), json!({"wait": false}), json!({"jump": 1})] {
        let (st, err) = call(&app, Method::POST, &mv, Some(body.clone())).await;
        assert_eq!((st, error_code(&err)), (StatusCode::CONFLICT, "illegal_move"), "{body}");
    }
    // every other anchor is a legal target
    let (st, r) = call(&app, Method::POST, &mv, Some(json!({"target": 0}))).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(r["accepted"], true);
}

#[tokio::test]
async fn blocked_lane_ends_in_interception() {
    let app = app();
    let cfg = GameConfig::regular(5, 2, 0.32);
    for start in 0..5 {
        let (_, created) = call(&app, Method::POST, "/sessions", Some(pentagon(0.32, start))).await;
        let lanes = created["bundle"]["lanes"].as_array().unwrap();
        let blocked = created["snapshot"]["blocked"].as_array().unwrap();
        if created["snapshot"]["status"] != "open" {
            continue;
        }
        let Some(li) = (0..lanes.len()).find(|&i| blocked[i] == true && lanes[i]["from"] == start) else {
            continue;
        };
        let to = lanes[li]["to"].as_u64().unwrap() as usize;
        let pursuers: Vec<Point> =
            serde_json::from_value(created["snapshot"]["state"]["pursuers"].clone()).unwrap();
        let clock = created["snapshot"]["state"]["clock"].as_f64().unwrap();
        let lane = cfg.lane(start, to);
        let expect = pursuers.iter().filter_map(|&p| interception_time(p, &lane, &cfg)).fold(f64::INFINITY, f64::min);

        let id = created["session_id"].as_str().unwrap();
        let (st, r) = call(&app, Method::POST, &format!("/sessions/{id}/move"), Some(json!({"target": to}))).await;
        assert_eq!(st, StatusCode::OK);
        assert_eq!(r["accepted"], true);
        assert_eq!(r["status"], "finished");
        assert_eq!(r["outcome"]["winner"], "pursuers");
        let hit = r["events"].as_array().unwrap().iter().find(|e| e["event"] == "interception").expect("interception event");
        assert!((hit["t"].as_f64().unwrap() - (clock + expect)).abs() < 1e-9, "{hit} vs {expect}");

        // finished sessions are immutable
        let (st, err) = call(&app, Method::POST, &format!("/sessions/{id}/move"), Some(json!({"target": start}))).await;
        assert_eq!((st, error_code(&err)), (StatusCode::CONFLICT, "illegal_move"));
        return;
    }
    panic!("no start anchor had a blocked outgoing lane");
}

#[tokio::test]
async fn journal_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sessions.jsonl");
    let app = router(Arc::new(SessionStore::with_journal(&path).unwrap()));
    let (_, created) = call(&app, Method::POST, "/sessions", Some(pentagon(0.25, 1))).await;
    let id = created["session_id"].as_str().unwrap().to_string();
    for target in [3, 0, 2] {
        call(&app, Method::POST, &format!("/sessions/{id}/move"), Some(json!({"target": target}))).await;
    }
    let (_, before) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;

    let restarted = router(Arc::new(SessionStore::with_journal(&path).unwrap()));
    let (st, after) = call(&restarted, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(after["state"], before["state"]);
    assert_eq!(after["status"], before["status"]);
}
