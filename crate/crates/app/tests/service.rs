use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use hiertable_app::service::router;
use hiertable_app::store::SessionStore;
use hiertable_core::config::EngineConfig;
use hiertable_core::ingest::emit_canonical;
use hiertable_core::synth::case_study_table;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, text) = call(app, method, uri, body.map(|b| b.to_string())).await;
    (s, serde_json::from_str(&text).unwrap_or(Value::Null))
}

fn t1_text() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/t1.json")).unwrap()
}

async fn setup(app: &Router, table: String) -> (String, String) {
    let (s, created) = call(app, "POST", "/tables", Some(table)).await;
    assert_eq!(s, StatusCode::CREATED, "{created}");
    let tid = serde_json::from_str::<Value>(&created).unwrap()["table_id"].as_str().unwrap().to_string();
    let (s, v) = json_call(app, "POST", "/sessions", Some(json!({ "table_id": tid }))).await;
    assert_eq!(s, StatusCode::CREATED);
    (tid, v["session_id"].as_str().unwrap().to_string())
}

fn memory_app() -> Router {
    router(Arc::new(SessionStore::in_memory(EngineConfig::default())))
}

#[tokio::test]
async fn session_starts_on_first_page() {
    let app = memory_app();
    let (_, sid) = setup(&app, t1_text()).await;
    let (s, v) = json_call(&app, "GET", &format!("/sessions/{sid}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["view"]["combo"], json!({"r_depth": 1, "c_depth": 0}));
    assert_eq!(v["view"]["graph"]["nodes"].as_array().unwrap().len(), 5);
    let placements = v["view"]["placements"].as_array().unwrap();
    assert_eq!(placements.len(), 2);
    assert!(placements.iter().all(|p| p["pixel_rect"]["width"].as_f64().unwrap() > 0.0));
}

#[tokio::test]
async fn zoom_at_boundary_does_not_move() {
    let app = memory_app();
    let (_, sid) = setup(&app, t1_text()).await;
    let (s, v) = json_call(&app, "POST", &format!("/sessions/{sid}/zoom"), Some(json!({"direction": "out"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["moved"], false);
    let (_, v) = json_call(&app, "POST", &format!("/sessions/{sid}/zoom"), Some(json!({"direction": "in"}))).await;
    assert_eq!(v["moved"], true);
    assert_eq!(v["view"]["combo"]["r_depth"], 2);
}

#[tokio::test]
async fn page_switch_rules() {
    let app = memory_app();
    let (_, sid) = setup(&app, t1_text()).await;
    let uri = format!("/sessions/{sid}/page");
    let (s, _) = json_call(&app, "POST", &uri, Some(json!({"r_depth": 1, "c_depth": 1}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, v) = json_call(&app, "POST", &uri, Some(json!({"r_depth": 0, "c_depth": 1}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["view"]["combo"], json!({"r_depth": 0, "c_depth": 1}));
}

#[tokio::test]
async fn select_embed_filter_and_panels() {
    let app = memory_app();
    let (_, sid) = setup(&app, emit_canonical(&case_study_table(3))).await;
    let (_, v) = json_call(&app, "GET", &format!("/sessions/{sid}"), None).await;
    let block = v["view"]["page"]["blocks"][0]["id"].as_str().unwrap().to_string();
    let (s, v) = json_call(&app, "POST", &format!("/sessions/{sid}/select"), Some(json!({"block_id": block}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["view"]["selected_block"], block.as_str());

    let (s, alts) = json_call(&app, "GET", &format!("/sessions/{sid}/block/{block}/alternatives"), None).await;
    assert_eq!(s, StatusCode::OK);
    let second = alts["alternatives"][0]["id"].as_str().unwrap().to_string();
    assert!(alts["alternatives"][0]["chart_spec"]["mark"].is_string());
    let (s, v) = json_call(
        &app,
        "POST",
        &format!("/sessions/{sid}/embed"),
        Some(json!({"block_id": block, "fact_id": second})),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["view"]["focused_fact"], second.as_str());
    let (s, _) = json_call(
        &app,
        "POST",
        &format!("/sessions/{sid}/embed"),
        Some(json!({"block_id": block, "fact_id": "nope"})),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);

    let (s, v) = json_call(&app, "POST", &format!("/sessions/{sid}/filters"), Some(json!({"types": ["dominance"]}))).await;
    assert_eq!(s, StatusCode::OK);
    for p in v["view"]["placements"].as_array().unwrap() {
        if let Some(fid) = p["fact_id"].as_str() {
            assert!(fid.contains("__dominance__"));
        }
    }
    let (s, _) = json_call(&app, "POST", &format!("/sessions/{sid}/filters"), Some(json!({"types": ["bogus"]}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, raw) = json_call(&app, "GET", &format!("/sessions/{sid}/block/{block}/raw"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(raw["cells"].as_array().unwrap().len(), 10);
    assert_eq!(raw["cells"][0].as_array().unwrap().len(), 20);

    let (s, path) = json_call(&app, "GET", &format!("/sessions/{sid}/path"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(path["path_count"], 1);
    assert_eq!(path["step_count"], 3);
}

#[tokio::test]
async fn errors_are_reported() {
    let app = memory_app();
    let (s, v) = json_call(&app, "GET", "/sessions/missing", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["error"].is_string());
    let (s, _) = call(&app, "POST", "/tables", Some("{\"title\": 3}".into())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = json_call(&app, "POST", "/sessions", Some(json!({"table_id": "zzz"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn table_artifacts_match_library_output() {
    let app = memory_app();
    let (tid, _) = setup(&app, t1_text()).await;
    let (_, pages) = call(&app, "GET", &format!("/tables/{tid}/pages"), None).await;
    let table = hiertable_core::ingest::parse_any(&t1_text()).unwrap();
    let a = hiertable_core::pipeline::Analysis::new(table, EngineConfig::default());
    let scope = hiertable_core::pipeline::ArtifactScope::default();
    assert_eq!(pages, hiertable_core::pipeline::pages_json(&a, &scope));
    let (_, facts) = call(&app, "GET", &format!("/tables/{tid}/facts"), None).await;
    assert_eq!(facts, hiertable_core::pipeline::facts_json(&a, &scope));
}

#[tokio::test]
async fn restart_restores_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let (sid, before) = {
        let app = router(Arc::new(SessionStore::open(dir.path(), EngineConfig::default()).unwrap()));
        let (_, sid) = setup(&app, t1_text()).await;
        json_call(&app, "POST", &format!("/sessions/{sid}/zoom"), Some(json!({"direction": "in"}))).await;
        json_call(&app, "POST", &format!("/sessions/{sid}/select"), Some(json!({"block_id": "A.a1~*"}))).await;
        let (_, v) = call(&app, "GET", &format!("/sessions/{sid}"), None).await;
        (sid, v)
    };
    let app = router(Arc::new(SessionStore::open(dir.path(), EngineConfig::default()).unwrap()));
    let (s, after) = call(&app, "GET", &format!("/sessions/{sid}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(after, before);
}
