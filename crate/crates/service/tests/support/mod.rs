#![allow(dead_code)]

use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{DateTime, TimeZone, Utc};
use gptlods_core::llm::{Provider, ProviderConfig};
use gptlods_core::ntriples::{ingest_files, ParseMode};
use gptlods_core::{Engine, Index};
use gptlods_service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn athens_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/athens3")
}

pub fn athens_sources() -> Vec<(String, PathBuf)> {
    ["kgA", "kgB", "kgC"].iter().map(|n| (n.to_string(), athens_dir().join(format!("{n}.nt")))).collect()
}

pub fn athens_index() -> Index {
    let (registry, triples, _) = ingest_files(&athens_sources(), ParseMode::Strict).unwrap();
    Index::build(triples, registry)
}

pub fn canned_provider() -> Provider {
    Provider::from_config(&ProviderConfig::canned(athens_dir().join("canned.json"))).unwrap()
}

pub fn fixed_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 5, 1, 12, 0, 0).unwrap()
}

pub fn athens_app() -> Router {
    let state = AppState::new(Engine::from_index(athens_index()), Some(canned_provider())).with_fixed_time(fixed_time());
    router(state, None)
}

pub fn validate(name: &str, instance: &Value) {
    let defs: Value = serde_json::from_str(include_str!("../../schemas/api.json")).unwrap();
    let schema = json!({"$defs": defs["$defs"], "$ref": format!("#/$defs/{name}")});
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "{name} schema violations: {errors:?}\n{instance:#}");
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(body) => request.header("content-type", "application/json").body(Body::from(body.to_string())),
        None => request.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}
