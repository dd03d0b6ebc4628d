//! REST surface over the session store.

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hiertable_core::charts::{spec_for, ChartSpec};
use hiertable_core::error::{ExploreError, IngestError, LayoutError};
use hiertable_core::explore::{Command, Direction, ExplorationSession, PathDocument, ViewState};
use hiertable_core::facts::{DataFact, FactType};
use hiertable_core::pipeline::{facts_json, pages_json, Analysis, ArtifactScope};
use hiertable_core::table_model::Cell;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::store::{SessionStore, StoreError};

pub type AppState = Arc<SessionStore>;

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::UnknownTable(_) | StoreError::UnknownSession(_) => StatusCode::NOT_FOUND,
            StoreError::Ingest(IngestError::SchemaViolation { .. }) => StatusCode::BAD_REQUEST,
            StoreError::Ingest(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StoreError::Explore(ExploreError::DepthMismatch { .. }) => StatusCode::CONFLICT,
            StoreError::Explore(ExploreError::UnknownCombo(..))
            | StoreError::Explore(ExploreError::Layout(LayoutError::UnknownBlock(_))) => StatusCode::NOT_FOUND,
            StoreError::Explore(ExploreError::Layout(LayoutError::UnknownFact { .. })) => StatusCode::CONFLICT,
            StoreError::Io(_) | StoreError::Journal { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

pub fn router(store: AppState) -> Router {
    Router::new()
        .route("/tables", post(upload_table))
        .route("/tables/{id}/facts", get(table_facts))
        .route("/tables/{id}/pages", get(table_pages))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/select", post(select))
        .route("/sessions/{id}/zoom", post(zoom))
        .route("/sessions/{id}/page", post(switch_page))
        .route("/sessions/{id}/embed", post(embed))
        .route("/sessions/{id}/filters", post(filters))
        .route("/sessions/{id}/block/{block_id}/alternatives", get(alternatives))
        .route("/sessions/{id}/block/{block_id}/raw", get(raw_block))
        .route("/sessions/{id}/path", get(path))
        .with_state(store)
}

#[derive(Serialize)]
struct TableCreated {
    table_id: String,
    title: String,
    rows: usize,
    cols: usize,
}

async fn upload_table(State(store): State<AppState>, body: String) -> ApiResult<(StatusCode, Json<TableCreated>)> {
    let s = store.clone();
    let id = tokio::task::spawn_blocking(move || s.add_table(&body))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let a = store.analysis(&id)?;
    let created =
        TableCreated { table_id: id, title: a.table.title.clone(), rows: a.table.row_count(), cols: a.table.col_count() };
    Ok((StatusCode::CREATED, Json(created)))
}

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

async fn table_facts(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(json_text(facts_json(&*store.analysis(&id)?, &ArtifactScope::default())))
}

async fn table_pages(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(json_text(pages_json(&*store.analysis(&id)?, &ArtifactScope::default())))
}

#[derive(Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub moved: bool,
    pub view: ViewState,
}

fn view(store: &SessionStore, id: &str, moved: bool) -> ApiResult<Json<SessionView>> {
    let view = store.read(id, |s, a| s.view(a))?;
    Ok(Json(SessionView { session_id: id.to_string(), moved, view }))
}

fn run(store: &SessionStore, id: &str, cmd: Command) -> ApiResult<Json<SessionView>> {
    let moved = store.apply(id, cmd)?;
    view(store, id, moved)
}

#[derive(Deserialize)]
struct NewSession {
    table_id: String,
}

async fn create_session(
    State(store): State<AppState>,
    Json(req): Json<NewSession>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let id = store.create_session(&req.table_id)?;
    Ok((StatusCode::CREATED, view(&store, &id, false)?))
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    view(&store, &id, false)
}

#[derive(Deserialize)]
struct SelectReq {
    block_id: String,
    #[serde(default)]
    fact_id: Option<String>,
}

async fn select(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<SelectReq>,
) -> ApiResult<Json<SessionView>> {
    run(&store, &id, Command::Select { block_id: req.block_id, fact_id: req.fact_id, ts: now_ms() })
}

#[derive(Deserialize)]
struct ZoomReq {
    direction: Direction,
}

async fn zoom(State(store): State<AppState>, Path(id): Path<String>, Json(req): Json<ZoomReq>) -> ApiResult<Json<SessionView>> {
    run(&store, &id, Command::Zoom { direction: req.direction, ts: now_ms() })
}

#[derive(Deserialize)]
struct PageReq {
    r_depth: usize,
    c_depth: usize,
}

async fn switch_page(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<PageReq>,
) -> ApiResult<Json<SessionView>> {
    run(&store, &id, Command::SwitchPage { r_depth: req.r_depth, c_depth: req.c_depth, ts: now_ms() })
}

#[derive(Deserialize)]
struct EmbedReq {
    block_id: String,
    fact_id: String,
}

async fn embed(State(store): State<AppState>, Path(id): Path<String>, Json(req): Json<EmbedReq>) -> ApiResult<Json<SessionView>> {
    run(&store, &id, Command::Embed { block_id: req.block_id, fact_id: req.fact_id, ts: now_ms() })
}

#[derive(Deserialize)]
struct FilterReq {
    types: Vec<String>,
}

async fn filters(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<FilterReq>,
) -> ApiResult<Json<SessionView>> {
    let types = req
        .types
        .iter()
        .map(|t| t.parse::<FactType>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, e))?;
    run(&store, &id, Command::Filter { types, ts: now_ms() })
}

#[derive(Serialize)]
struct FactEntry {
    #[serde(flatten)]
    fact: DataFact,
    chart_spec: ChartSpec,
}

#[derive(Serialize)]
struct Alternatives {
    block_id: String,
    name: String,
    embedded: Option<FactEntry>,
    alternatives: Vec<FactEntry>,
}

fn with_block<T>(
    store: &SessionStore,
    id: &str,
    block_id: &str,
    f: impl FnOnce(&ExplorationSession, &Analysis) -> T,
) -> ApiResult<T> {
    let out = store.read(id, |s, a| s.current.block(block_id).is_some().then(|| f(s, a)))?;
    out.ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("block {block_id} is not on the current page")))
}

async fn alternatives(
    State(store): State<AppState>,
    Path((id, block_id)): Path<(String, String)>,
) -> ApiResult<Json<Alternatives>> {
    let out = with_block(&store, &id, &block_id, |s, a| {
        let entry = |fid: &str| {
            a.fact(fid).map(|f| FactEntry { chart_spec: spec_for(f), fact: f.clone() })
        };
        Alternatives {
            name: s.current.block(&block_id).map(|b| b.display_name()).unwrap_or_default(),
            embedded: s.current.embedded_in(&block_id).and_then(entry),
            alternatives: s.current.alternatives[&block_id].iter().filter_map(|f| entry(f)).collect(),
            block_id: block_id.clone(),
        }
    })?;
    Ok(Json(out))
}

#[derive(Serialize)]
struct RawBlock {
    block_id: String,
    row_labels: Vec<Vec<String>>,
    col_labels: Vec<Vec<String>>,
    cells: Vec<Vec<Cell>>,
}

async fn raw_block(
    State(store): State<AppState>,
    Path((id, block_id)): Path<(String, String)>,
) -> ApiResult<Json<RawBlock>> {
    let out = with_block(&store, &id, &block_id, |s, a| {
        let rect = s.current.block(&block_id).expect("checked").rect;
        let rows = a.table.row_header.leaf_paths();
        let cols = a.table.col_header.leaf_paths();
        RawBlock {
            block_id: block_id.clone(),
            row_labels: rows[rect.x1..rect.x2].to_vec(),
            col_labels: cols[rect.y1..rect.y2].to_vec(),
            cells: (rect.x1..rect.x2).map(|r| (rect.y1..rect.y2).map(|c| a.table.cell(r, c)).collect()).collect(),
        }
    })?;
    Ok(Json(out))
}

async fn path(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<PathDocument>> {
    Ok(Json(store.read(&id, |s, _| s.export_path())?))
}
