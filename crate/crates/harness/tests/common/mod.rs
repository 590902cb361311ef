#![allow(dead_code)]

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::routing::post;
use axum::{Json, Router};
use bindbench_harness::RunConfig;
use serde_json::{json, Value};

/// All four tasks, two conditions, one oracle.
pub fn oracle_toml(out: &Path, cache: &Path, instances: usize) -> String {
    format!(
        r#"
name = "oracle-e2e"
base_seed = 11
instances_per_cell = {instances}
conditions = ["simple", "ours"]
out_dir = "{}"
cache_dir = "{}"

[tasks.search]
n_objects = [6, 10]

[tasks.count]
n_targets = [4]
n_distractors = 2

[tasks.describe]
cells = [{{ n_objects = 10, n_triplets = [5] }}]

[tasks.spatial]

[[providers]]
kind = "oracle"
model_id = "oracle"
"#,
        out.display(),
        cache.display()
    )
}

pub fn oracle_config(out: &Path, cache: &Path, instances: usize) -> RunConfig {
    let cfg = RunConfig::from_toml_str(&oracle_toml(out, cache, instances)).unwrap();
    cfg.validate().unwrap();
    cfg
}

/// A chat-completions endpoint that counts requests and tracks how many
/// are in flight at once.
#[derive(Clone, Default)]
pub struct Stub {
    pub hits: Arc<AtomicUsize>,
    pub in_flight: Arc<AtomicUsize>,
    pub max_in_flight: Arc<AtomicUsize>,
    pub delay_ms: u64,
}

async fn completions(State(stub): State<Stub>, Json(_body): Json<Value>) -> Json<Value> {
    stub.hits.fetch_add(1, Ordering::SeqCst);
    let now = stub.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    stub.max_in_flight.fetch_max(now, Ordering::SeqCst);
    if stub.delay_ms > 0 {
        tokio::time::sleep(Duration::from_millis(stub.delay_ms)).await;
    }
    stub.in_flight.fetch_sub(1, Ordering::SeqCst);
    Json(json!({
        "id": "stub",
        "choices": [{"message": {"content": "Looking carefully. [True]"}, "finish_reason": "stop"}],
        "usage": {"prompt_tokens": 10, "completion_tokens": 3}
    }))
}

pub async fn serve(stub: Stub) -> String {
    let app = Router::new().route("/chat/completions", post(completions)).with_state(stub);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}")
}

/// Search-only grid against a stub endpoint.
pub fn stub_config(out: &Path, cache: &Path, url: &str, instances: usize, concurrency: usize) -> RunConfig {
    let text = format!(
        r#"
base_seed = 3
instances_per_cell = {instances}
conditions = ["simple", "ours"]
out_dir = "{}"
cache_dir = "{}"

[tasks.search]
n_objects = [6]

[[providers]]
kind = "openai_compatible"
model_id = "stub-model"
base_url = "{url}"
requests_per_minute = 600000
concurrency = {concurrency}
backoff_base_ms = 1
"#,
        out.display(),
        cache.display()
    );
    let cfg = RunConfig::from_toml_str(&text).unwrap();
    cfg.validate().unwrap();
    cfg
}
