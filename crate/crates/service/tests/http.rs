use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use intimacy_core::bws::{self, Tuple4};
use intimacy_service::{router, AnnotationService, ServiceConfig, TupleSet};

fn tuple_set(id: &str, n_tuples: usize) -> TupleSet {
    let items: Vec<String> = (0..n_tuples * 4).map(|i| format!("q{i:04}")).collect();
    let tuples = items
        .chunks(4)
        .enumerate()
        .map(|(i, c)| {
            Tuple4::new(
                format!("t{i:04}"),
                [c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()],
            )
            .unwrap()
        })
        .collect();
    let texts = items
        .iter()
        .map(|i| (i.clone(), format!("What about {i}?")))
        .collect::<HashMap<_, _>>();
    TupleSet {
        id: id.into(),
        tuples,
        texts,
    }
}

fn open(dir: &Path, sets: Vec<TupleSet>) -> Router {
    let config = ServiceConfig {
        journal_dir: dir.to_path_buf(),
        seed: 11,
        instructions: "Pick two.".into(),
    };
    router(Arc::new(AnnotationService::open(config, sets).unwrap()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json");
    let req = req
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

async fn session(app: &Router, annotator: &str, set: &str) -> String {
    let (s, v) = json_call(
        app,
        "POST",
        "/sessions",
        Some(json!({"annotator_id": annotator, "tuple_set_id": set})),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

/// Answers the current tuple with its first displayed item best and last worst.
async fn answer(app: &Router, sid: &str) -> (StatusCode, Value) {
    let (_, next) = json_call(app, "GET", &format!("/sessions/{sid}/next"), None).await;
    let items = next["items"].as_array().unwrap();
    let body = json!({"tuple_id": next["tuple_id"], "best": items[0]["id"], "worst": items[3]["id"]});
    json_call(app, "POST", &format!("/sessions/{sid}/judgments"), Some(body)).await
}

#[tokio::test]
async fn session_flow_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let app = open(dir.path(), vec![tuple_set("a", 3)]);

    let (s, v) = json_call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"annotator_id": "x", "tuple_set_id": "nope"})),
    )
    .await;
    assert_eq!(
        (s, v["error"].as_str()),
        (StatusCode::NOT_FOUND, Some("unknown_tuple_set"))
    );
    let (s, v) = json_call(&app, "GET", "/sessions/s999999/next", None).await;
    assert_eq!(
        (s, v["error"].as_str()),
        (StatusCode::NOT_FOUND, Some("unknown_session"))
    );

    let s1 = session(&app, "ann", "a").await;
    let s2 = session(&app, "ann", "a").await;
    assert_ne!(s1, s2);

    let (_, first) = json_call(&app, "GET", &format!("/sessions/{s1}/next"), None).await;
    let (_, again) = json_call(&app, "GET", &format!("/sessions/{s1}/next"), None).await;
    assert_eq!(first, again);
    assert_eq!(first["status"], "pending");
    assert_eq!(first["items"].as_array().unwrap().len(), 4);

    let tid = first["tuple_id"].clone();
    let a = first["items"][0]["id"].clone();
    let b = first["items"][1]["id"].clone();
    let url = format!("/sessions/{s1}/judgments");
    let (s, v) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"tuple_id": tid, "best": a, "worst": a})),
    )
    .await;
    assert_eq!(
        (s, v["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("invalid_judgment"))
    );
    let (s, v) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"tuple_id": tid, "best": a, "worst": "zzz"})),
    )
    .await;
    assert_eq!(
        (s, v["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("invalid_judgment"))
    );
    let (s, v) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"tuple_id": "t9999", "best": a, "worst": b})),
    )
    .await;
    assert_eq!((s, v["error"].as_str()), (StatusCode::CONFLICT, Some("out_of_order")));

    let (s, v) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"tuple_id": tid, "best": a, "worst": b})),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["completed"], 1);
    let (s, _) = json_call(
        &app,
        "POST",
        &url,
        Some(json!({"tuple_id": tid, "best": a, "worst": b})),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);

    // The other session is independent.
    let (_, p2) = json_call(&app, "GET", &format!("/sessions/{s2}/progress"), None).await;
    assert_eq!(p2["completed"], 0);

    for _ in 0..2 {
        assert_eq!(answer(&app, &s1).await.0, StatusCode::OK);
    }
    let (_, done) = json_call(&app, "GET", &format!("/sessions/{s1}/next"), None).await;
    assert_eq!(done, json!({"status": "done", "total": 3}));
    let (_, p) = json_call(&app, "GET", &format!("/sessions/{s1}/progress"), None).await;
    assert_eq!(p["done"], true);

    let (s, text) = call(&app, "GET", "/instructions", None).await;
    assert_eq!((s, text.as_slice()), (StatusCode::OK, &b"Pick two."[..]));
}

#[tokio::test]
async fn display_order_is_the_logged_permutation() {
    let dir = tempfile::tempdir().unwrap();
    let set = tuple_set("a", 5);
    let tuples: HashMap<String, Tuple4> = set.tuples.iter().map(|t| (t.tuple_id.clone(), t.clone())).collect();
    let app = open(dir.path(), vec![set]);
    let sid = session(&app, "ann", "a").await;
    let mut seen = std::collections::HashSet::new();
    for _ in 0..5 {
        let (_, next) = json_call(&app, "GET", &format!("/sessions/{sid}/next"), None).await;
        let t = &tuples[next["tuple_id"].as_str().unwrap()];
        let order: Vec<usize> = serde_json::from_value(next["order"].clone()).unwrap();
        for (k, &o) in order.iter().enumerate() {
            assert_eq!(next["items"][k]["id"], t.items[o].as_str());
        }
        assert!(seen.insert(next["tuple_id"].as_str().unwrap().to_string()));
        answer(&app, &sid).await;
    }
}

#[tokio::test]
async fn empty_export_has_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let app = open(dir.path(), vec![tuple_set("a", 2)]);
    let (s, body) = call(&app, "GET", "/tuple-sets/a/export", None).await;
    assert_eq!(s, StatusCode::OK);
    let text = String::from_utf8(body).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(bws::io::read_judgments(text.as_bytes()).unwrap().is_empty());
}

#[tokio::test]
async fn acked_judgments_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (sid, pending) = {
        let app = open(dir.path(), vec![tuple_set("a", 6)]);
        let sid = session(&app, "ann", "a").await;
        for _ in 0..3 {
            assert_eq!(answer(&app, &sid).await.0, StatusCode::OK);
        }
        let (_, next) = json_call(&app, "GET", &format!("/sessions/{sid}/next"), None).await;
        (sid, next)
    };
    let before = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    // Simulate a crash in the middle of an append.
    let mut torn = before.clone();
    torn.extend_from_slice(br#"{"type":"judgment","session_id":"#);
    std::fs::write(dir.path().join("a.jsonl"), &torn).unwrap();

    let app = open(dir.path(), vec![tuple_set("a", 6)]);
    let (_, p) = json_call(&app, "GET", &format!("/sessions/{sid}/progress"), None).await;
    assert_eq!(p["completed"], 3);
    let (_, next) = json_call(&app, "GET", &format!("/sessions/{sid}/next"), None).await;
    assert_eq!(next, pending);
    assert_eq!(std::fs::read(dir.path().join("a.jsonl")).unwrap(), before);

    // New sessions do not reuse ids, and appends continue cleanly.
    let other = session(&app, "ann2", "a").await;
    assert_ne!(other, sid);
    assert_eq!(answer(&app, &sid).await.1["completed"], 4);
    drop(app);
    let app = open(dir.path(), vec![tuple_set("a", 6)]);
    let (_, p) = json_call(&app, "GET", &format!("/sessions/{sid}/progress"), None).await;
    assert_eq!(p["completed"], 4);
}

#[tokio::test]
async fn dual_annotated_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let app = open(dir.path(), vec![tuple_set("pilot", 212)]);
    for annotator in ["ann1", "ann2"] {
        let sid = session(&app, annotator, "pilot").await;
        for _ in 0..212 {
            assert_eq!(answer(&app, &sid).await.0, StatusCode::OK);
        }
    }
    let (_, body) = call(&app, "GET", "/tuple-sets/pilot/export", None).await;
    let records = bws::io::read_judgments(body.as_slice()).unwrap();
    assert_eq!(records.len(), 424);
    assert_eq!(bws::expand_all(&records).unwrap().len(), 5 * 424);
    let per_annotator = records.iter().filter(|(_, j)| j.annotator_id == "ann1").count();
    assert_eq!(per_annotator, 212);
    // Export is a pure function of the journal.
    let (_, again) = call(&app, "GET", "/tuple-sets/pilot/export", None).await;
    assert_eq!(body, again);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_submits_accept_exactly_one() {
    let dir = tempfile::tempdir().unwrap();
    let app = open(dir.path(), vec![tuple_set("a", 4)]);
    let sid = session(&app, "ann", "a").await;
    let (_, next) = json_call(&app, "GET", &format!("/sessions/{sid}/next"), None).await;
    let body = json!({"tuple_id": next["tuple_id"], "best": next["items"][0]["id"], "worst": next["items"][1]["id"]});
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let (app, sid, body) = (app.clone(), sid.clone(), body.clone());
            tokio::spawn(async move {
                json_call(&app, "POST", &format!("/sessions/{sid}/judgments"), Some(body))
                    .await
                    .0
            })
        })
        .collect();
    let mut ok = 0;
    for h in handles {
        match h.await.unwrap() {
            StatusCode::OK => ok += 1,
            s => assert_eq!(s, StatusCode::CONFLICT),
        }
    }
    assert_eq!(ok, 1);
    let (_, body) = call(&app, "GET", "/tuple-sets/a/export", None).await;
    assert_eq!(bws::io::read_judgments(body.as_slice()).unwrap().len(), 1);

    // Parallel sessions each get their full set recorded.
    let sids: Vec<String> = open_sessions(&app, 6).await;
    let handles: Vec<_> = sids
        .into_iter()
        .map(|sid| {
            let app = app.clone();
            tokio::spawn(async move {
                for _ in 0..4 {
                    assert_eq!(answer(&app, &sid).await.0, StatusCode::OK);
                }
            })
        })
        .collect();
    for h in handles {
        h.await.unwrap();
    }
    let (_, body) = call(&app, "GET", "/tuple-sets/a/export", None).await;
    assert_eq!(bws::io::read_judgments(body.as_slice()).unwrap().len(), 1 + 6 * 4);
}

async fn open_sessions(app: &Router, n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..n {
        out.push(session(app, &format!("p{i}"), "a").await);
    }
    out
}
