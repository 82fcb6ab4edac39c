//! A guessing game played over HTTP against the session service, with a
//! freshly trained model guessing alongside the human. Requests go through
//! the router in-process; `sketchqa serve` exposes the same routes on a
//! socket.
//!
//! ```text
//! cargo run --release --example live_session
//! ```

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use sketchqa::corpus::{parse_corpus, RasterExtractor};
use sketchqa::gateway::http::router;
use sketchqa::gateway::{LiveModel, ServiceConfig, SessionService};
use sketchqa::guesser::{featurize, fit_normalizer, train_unified, UnifiedConfig};
use sketchqa::lexnet::Lexicon;
use sketchqa::neuralcore::OptimizerConfig;

async fn call(app: &Router, method: &str, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .expect("request");
    let resp = app.clone().oneshot(req).await.expect("infallible router");
    let json = resp
        .headers()
        .get("content-type")
        .is_some_and(|v| v.as_bytes().starts_with(b"application/json"));
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.expect("body");
    if json {
        serde_json::from_slice(&bytes).expect("json body")
    } else {
        Value::String(String::from_utf8_lossy(&bytes).into())
    }
}

#[tokio::main]
async fn main() -> sketchqa::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let lex = Lexicon::load_dir(&data.join("lexicon"))?;
    let table = Arc::new(lex.embeddings()?.clone());
    let corpus = parse_corpus(&data.join("separable_corpus.jsonl"), true)?.corpus;

    let fx = RasterExtractor::default();
    let examples = featurize(&corpus, &fx)?;
    let config = UnifiedConfig {
        hidden: 32,
        max_epochs: 80,
        optimizer: OptimizerConfig {
            early_stop_patience: 0,
            ..OptimizerConfig::default()
        },
        ..UnifiedConfig::default()
    };
    let (model, _) = train_unified(&examples, &[], &config, fit_normalizer(&examples)?, Some(fx.0), Arc::clone(&table))?;
    let live = LiveModel::from_checkpoint(&model.to_checkpoint(), table)?;
    let sketch = corpus.records()[4].clone();
    let svc = SessionService::new(corpus, lex, Some(live), ServiceConfig::default())?;
    let app = router(Arc::new(svc));

    let created = call(&app, "POST", "/sessions", json!({"selector": "id", "id": sketch.id(), "subject": "demo"})).await;
    let sid = created["session_id"].as_str().expect("session id").to_string();
    println!("session {sid}: {} strokes", created["total_strokes"]);

    // the human echoes the corpus guesses, misspelling the first one
    let first = sketch.guesses.first_guess_index();
    for (t, g) in sketch.guesses.guesses.iter().enumerate() {
        let guess = if Some(t) == first { format!("{g}e") } else { g.clone() };
        let step = call(&app, "POST", &format!("/sessions/{sid}/advance"), json!({"guess": guess})).await;
        println!("stroke {:>2}  human {:<12} model {}", t + 1, format!("{guess:?}"), step["model_guess"]);
        if let Some(c) = step["category"].as_str() {
            println!("revealed: {c}");
        }
    }

    let score = call(&app, "POST", &format!("/sessions/{sid}/score"), json!({"criteria": "EM|SUB|SYN|HY"})).await;
    println!("final: human {} model {}", score["human_final"], score["model_final"]);
    let ack = call(
        &app,
        "POST",
        &format!("/sessions/{sid}/ratings"),
        json!({"judge_id": "j1", "guesser": "model", "rating": -1, "scale_reversed": true}),
    )
    .await;
    println!("rating stored as {}", ack["stored"]);
    let export = call(&app, "GET", "/export", Value::Null).await;
    print!("export:\n{}", export.as_str().unwrap_or_default());
    Ok(())
}
