use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use sketchqa::corpus::{parse_corpus_str, Corpus};
use sketchqa::gateway::http::router;
use sketchqa::gateway::{AdvanceRequest, ServiceConfig, SessionService, SketchSelector};
use sketchqa::lexnet::Lexicon;

fn lexicon() -> Lexicon {
    Lexicon::load_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/lexicon")).unwrap()
}

fn record(id: &str, category: &str, strokes: usize) -> String {
    let strokes: Vec<Value> = (0..strokes)
        .map(|i| {
            let v = 0.1 + 0.1 * i as f64;
            json!([[v, 0.2], [0.5, v]])
        })
        .collect();
    let guesses = vec![""; strokes.len()];
    json!({"id": id, "category": category, "subject": "u", "strokes": strokes, "guesses": guesses}).to_string()
}

fn corpus() -> Corpus {
    let text = [
        record("k-revolver", "revolver", 3),
        record("k-giraffe", "giraffe", 2),
        record("k-cat", "cat", 5),
        record("k-cup", "cup", 4),
    ]
    .join("\n");
    parse_corpus_str(&text, true).unwrap().corpus
}

fn service(config: ServiceConfig) -> Arc<SessionService> {
    Arc::new(SessionService::new(corpus(), lexicon(), None, config).unwrap())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let is_json = resp
        .headers()
        .get("content-type")
        .is_some_and(|v| v.to_str().unwrap().starts_with("application/json"));
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if is_json {
        serde_json::from_slice(&bytes).unwrap()
    } else {
        Value::String(String::from_utf8_lossy(&bytes).into())
    };
    (status, value)
}

async fn create(app: &Router, id: &str) -> String {
    let (status, body) = call(app, "POST", "/sessions", Some(json!({"selector": "id", "id": id}))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["session_id"].as_str().unwrap().to_string()
}

async fn play(app: &Router, sid: &str, guesses: &[&str]) -> Value {
    let mut last = Value::Null;
    for g in guesses {
        let (status, body) = call(app, "POST", &format!("/sessions/{sid}/advance"), Some(json!({"guess": g}))).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        last = body;
    }
    last
}

#[tokio::test]
async fn session_walks_strokes_then_reveals() {
    let app = router(service(ServiceConfig::default()));
    let (status, created) = call(&app, "POST", "/sessions", Some(json!({"selector": "id", "id": "k-cup"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["cursor"], 1);
    assert_eq!(created["total_strokes"], 4);
    assert_eq!(created["phase"], "ACTIVE");
    let sid = created["session_id"].as_str().unwrap();

    let step = play(&app, sid, &[""]).await;
    assert_eq!(step["cursor"], 2);
    assert!(step["next_stroke"].is_array());
    assert!(step["category"].is_null());

    let (_, view) = call(&app, "GET", &format!("/sessions/{sid}"), None).await;
    assert_eq!(view["strokes"].as_array().unwrap().len(), 2);
    assert!(view["category"].is_null());

    let last = play(&app, sid, &["bowl", "", "mug"]).await;
    assert_eq!(last["phase"], "REVEALED");
    assert_eq!(last["category"], "cup");
    assert!(last["next_stroke"].is_null());

    let (status, err) = call(&app, "POST", &format!("/sessions/{sid}/advance"), Some(json!({"guess": "x"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "protocol_violation");
}

#[tokio::test]
async fn error_statuses() {
    let app = router(service(ServiceConfig::default()));
    let (status, body) = call(&app, "GET", "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "not_found");

    let (status, _) = call(&app, "POST", "/sessions", Some(json!({"selector": "id", "id": "missing"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({"selector": "category", "category": "zebra"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, body) = call(&app, "POST", "/sessions", Some(json!({"selector": "id"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "bad_request");

    let sid = create(&app, "k-cat").await;
    let (status, _) = call(&app, "POST", &format!("/sessions/{sid}/advance"), Some(json!({"gues": "cat"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    // scoring and rating wait for the reveal
    let (status, _) = call(&app, "POST", &format!("/sessions/{sid}/score"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let rating = json!({"judge_id": "j", "guesser": "human", "rating": 1});
    let (status, _) = call(&app, "POST", &format!("/sessions/{sid}/ratings"), Some(rating)).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, _) = call(&app, "GET", "/export", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "GET", "/no/such/route", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn hypernym_guess_needs_the_parent_child_criterion() {
    let app = router(service(ServiceConfig::default()));
    let sid = create(&app, "k-revolver").await;
    play(&app, sid.as_str(), &["", "", "firearm"]).await;

    let (status, strict) = call(&app, "POST", &format!("/sessions/{sid}/score"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(strict["criteria"], "EM|SUB|SYN");
    assert_eq!(strict["human_final"], false);

    let (_, lenient) = call(
        &app,
        "POST",
        &format!("/sessions/{sid}/score"),
        Some(json!({"criteria": "EM|SUB|SYN|HY-PC"})),
    )
    .await;
    assert_eq!(lenient["human_final"], true);
    assert_eq!(lenient["steps"][2]["human_correct"], true);
    assert_eq!(lenient["steps"][0]["human_correct"], false);
}

#[tokio::test]
async fn ratings_are_canonical_and_replaced_with_a_note() {
    let app = router(service(ServiceConfig::default()));
    let sid = create(&app, "k-giraffe").await;
    play(&app, &sid, &["", "giraffe"]).await;
    let uri = format!("/sessions/{sid}/ratings");

    let (status, ack) = call(
        &app,
        "POST",
        &uri,
        Some(json!({"judge_id": "j1", "guesser": "model", "rating": 2, "scale_reversed": true})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{ack}");
    assert_eq!(ack["stored"], -2);
    assert!(ack["replaced"].is_null());

    let (_, ack) = call(&app, "POST", &uri, Some(json!({"judge_id": "j1", "guesser": "model", "rating": 1}))).await;
    assert_eq!(ack["replaced"], -2);
    assert!(ack["note"].as_str().unwrap().contains("replaced"));

    let (status, _) = call(&app, "POST", &uri, Some(json!({"judge_id": "j1", "guesser": "model", "rating": 3}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (_, view) = call(&app, "GET", &format!("/sessions/{sid}"), None).await;
    assert_eq!(view["ratings"].as_array().unwrap().len(), 1);
    let (_, ratings) = call(&app, "GET", "/export?part=ratings", None).await;
    assert_eq!(ratings.as_str().unwrap(), format!("{sid}\tj1\tmodel\t1\n"));
}

#[tokio::test]
async fn export_round_trips_and_normalizes() {
    let app = router(service(ServiceConfig::default()));
    let a = create(&app, "k-giraffe").await;
    play(&app, &a, &["", "Girafe"]).await;
    let b = create(&app, "k-cat").await;
    play(&app, &b, &["", "", "cat", "", ""]).await;
    let c = create(&app, "k-cup").await;
    play(&app, &c, &["", "", "", ""]).await;
    // an unfinished session stays out of the export
    create(&app, "k-revolver").await;

    let (status, text) = call(&app, "GET", "/export", None).await;
    assert_eq!(status, StatusCode::OK);
    let text = text.as_str().unwrap().to_string();
    assert_eq!(text.lines().count(), 3);
    let parsed = parse_corpus_str(&text, true).unwrap().corpus;
    assert_eq!(parsed.len(), 3);
    assert_eq!(parsed.get(&a).unwrap().guesses.guesses, ["", "giraffe"]);
    assert_eq!(parsed.get(&b).unwrap().guesses.guesses, ["", "", "cat", "cat", "cat"]);
    assert_eq!(parsed.get(&c).unwrap().guesses.guesses, ["", "", "", ""]);
    assert_eq!(parsed.get(&b).unwrap().category(), "cat");

    let (_, only_cats) = call(&app, "GET", "/export?category=cat&part=json", None).await;
    assert_eq!(only_cats["sessions"], 1);

    let (status, hist) = call(&app, "GET", "/analytics/histogram?source=sessions", None).await;
    assert_eq!(status, StatusCode::OK, "{hist}");
    let (status, _) = call(&app, "GET", "/analytics/first-guess", None).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "GET", "/analytics/unknown", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (_, health) = call(&app, "GET", "/healthz", None).await;
    assert_eq!(health["sessions"], 4);
    assert_eq!(health["corpus_records"], 4);
}

#[tokio::test]
async fn free_draw_session() {
    let app = router(service(ServiceConfig::default()));
    let (status, created) = call(&app, "POST", "/sessions", Some(json!({"selector": "free-draw"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["cursor"], 0);
    assert!(created["total_strokes"].is_null());
    let sid = created["session_id"].as_str().unwrap();
    let uri = format!("/sessions/{sid}/advance");

    let (status, _) = call(&app, "POST", &uri, Some(json!({"category": "cat"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, "POST", &uri, Some(json!({"stroke": [[2.0, 0.0]]}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, step) = call(&app, "POST", &uri, Some(json!({"stroke": [[0.1, 0.1], [0.4, 0.4]], "guess": "kat"}))).await;
    assert_eq!(status, StatusCode::OK, "{step}");
    assert_eq!(step["cursor"], 1);
    let (_, done) = call(&app, "POST", &uri, Some(json!({"stroke": [[0.5, 0.5]], "category": "Cat"}))).await;
    assert_eq!(done["phase"], "REVEALED");
    assert_eq!(done["category"], "cat");

    let (_, text) = call(&app, "GET", "/export", None).await;
    let parsed = parse_corpus_str(text.as_str().unwrap(), true).unwrap().corpus;
    assert_eq!(parsed.records()[0].guesses.guesses, ["cat", "cat"]);
}

#[test]
fn concurrent_creates_get_distinct_ids() {
    let svc = service(ServiceConfig::default());
    let ids: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let svc = &svc;
                s.spawn(move || {
                    (0..25)
                        .map(|_| svc.create(SketchSelector::Random, None).unwrap().session_id)
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    let unique: std::collections::BTreeSet<_> = ids.iter().collect();
    assert_eq!(unique.len(), 200);
    assert_eq!(svc.health().sessions, 200);
}

#[test]
fn event_log_replay_restores_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        log_path: Some(dir.path().join("events.jsonl")),
        ..ServiceConfig::default()
    };
    let (finished, open) = {
        let svc = service(config.clone());
        let a = svc.create(SketchSelector::Category("giraffe".into()), Some("ann".into())).unwrap().session_id;
        svc.advance(&a, AdvanceRequest::guess("")).unwrap();
        svc.advance(&a, AdvanceRequest::guess("giraffe")).unwrap();
        svc.rate(&a, "j", "human".parse().unwrap(), -1, false).unwrap();
        let b = svc.create(SketchSelector::Id("k-cat".into()), None).unwrap().session_id;
        svc.advance(&b, AdvanceRequest::guess("dog")).unwrap();
        ((a.clone(), svc.view(&a).unwrap()), (b.clone(), svc.view(&b).unwrap()))
    };

    let svc = service(config);
    assert_eq!(svc.view(&finished.0).unwrap(), finished.1);
    assert_eq!(svc.view(&open.0).unwrap(), open.1);
    // replayed sessions keep playing and new ids do not collide
    svc.advance(&open.0, AdvanceRequest::guess("cat")).unwrap();
    let c = svc.create(SketchSelector::Random, None).unwrap().session_id;
    assert!(c != finished.0 && c != open.0);
}
