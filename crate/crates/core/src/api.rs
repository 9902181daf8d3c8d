//! HTTP/JSON façade over the runtime model and the query engine.
//!
//! Every JSON response has the shape `{"ok": true, "data": ...}` or
//! `{"ok": false, "error": {"code": ..., "message": ...}}`. Reads share the
//! knowledge base; writes take it exclusively, so mutations are applied in
//! a single total order and the revision counter never skips.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Multipart, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use rust_decimal::Decimal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::RwLock;

use crate::builder::{build_abox, parse_csv_bundle, BuildError};
use crate::kb::{KbError, KnowledgeBase};
use crate::query::{self, QueryError, QueryForm};
use crate::runtime::{
    add_planned_execution_data, change_resource_performance, compute_oee, expected_performance, get_execution,
    get_product_status, get_resource_history, local_id, resolve_plan_instance, update_execution_data, ExecStatus,
    ExecutionPatch, NewExecution, Performance, RuntimeError, SimTime,
};

/// Header that must be `true` for `POST /query` to run an update.
pub const WRITE_HEADER: &str = "x-write";

pub struct AppState {
    pub kb: RwLock<KnowledgeBase>,
}

impl AppState {
    pub fn new(kb: KnowledgeBase) -> Arc<Self> {
        Arc::new(AppState { kb: RwLock::new(kb) })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/executions", post(post_execution))
        .route("/executions/{id}", get(get_execution_h).patch(patch_execution))
        .route("/products/{id}/status", get(product_status))
        .route("/resources/{id}/history", get(resource_history))
        .route("/resources/{id}/performance", patch(patch_performance))
        .route("/resources/{id}/oee", get(resource_oee))
        .route("/query", post(post_query))
        .route("/build", post(post_build))
        .route("/dump", get(dump))
        .with_state(state)
}

/// Serves the API until the process is stopped.
pub async fn serve(kb: KnowledgeBase, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(kb))).await
}

// ------------------------------------------------------------------ errors

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    /// CSV file and line of a build error.
    pub location: Option<(String, u64)>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            location: None,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "InvalidRequest", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({ "code": self.code, "message": self.message });
        if let Some((file, line)) = self.location {
            error["file"] = json!(file);
            error["line"] = json!(line);
        }
        (self.status, Json(json!({ "ok": false, "error": error }))).into_response()
    }
}

fn kb_error(e: &KbError) -> (StatusCode, &'static str) {
    match e {
        KbError::ProtectedTriple(_) => (StatusCode::FORBIDDEN, "ProtectedTriple"),
        KbError::InvalidIri(_) => (StatusCode::UNPROCESSABLE_ENTITY, "InvalidIri"),
        KbError::InvalidLiteral { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "InvalidLiteral"),
        KbError::MalformedTriple(_) => (StatusCode::UNPROCESSABLE_ENTITY, "MalformedTriple"),
        KbError::Parse(_) => (StatusCode::BAD_REQUEST, "ParseError"),
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let (status, code) = match &e {
            QueryError::Syntax { .. } => (StatusCode::BAD_REQUEST, "SyntaxError"),
            QueryError::UnsupportedFeature(_) => (StatusCode::BAD_REQUEST, "UnsupportedFeature"),
            QueryError::UnboundVariable(_) => (StatusCode::BAD_REQUEST, "UnboundVariable"),
            QueryError::UnboundTemplateVariable(_) => (StatusCode::BAD_REQUEST, "UnboundTemplateVariable"),
            QueryError::Kb(k) => kb_error(k),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<RuntimeError> for ApiError {
    fn from(e: RuntimeError) -> Self {
        let status = match &e {
            RuntimeError::UnknownEntity { .. } => StatusCode::NOT_FOUND,
            RuntimeError::IllegalTransition { .. } => StatusCode::CONFLICT,
            RuntimeError::Query(q) => return q.clone().into(),
            RuntimeError::Kb(k) => kb_error(k).0,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<BuildError> for ApiError {
    fn from(e: BuildError) -> Self {
        let code = match &e {
            BuildError::MissingFile(_) => "MissingFile",
            BuildError::CsvSyntax { .. } => "CsvSyntax",
            BuildError::DanglingReference { .. } => "DanglingReference",
            BuildError::DomainViolation { .. } => "DomainViolation",
            BuildError::Kb(_) => "KbError",
        };
        ApiError {
            location: e.location().map(|(f, l)| (f.to_string(), l)),
            ..ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
        }
    }
}

type ApiResult = Result<Response, ApiError>;

fn ok(data: impl Serialize) -> ApiResult {
    Ok(Json(json!({ "ok": true, "data": data })).into_response())
}

fn created(data: impl Serialize) -> ApiResult {
    Ok((StatusCode::CREATED, Json(json!({ "ok": true, "data": data }))).into_response())
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

fn time_param(params: &HashMap<String, String>, name: &str) -> Result<SimTime, ApiError> {
    let raw = params
        .get(name)
        .ok_or_else(|| ApiError::bad_request(format!("missing query parameter {name}")))?;
    raw.parse()
        .map_err(|e: String| ApiError::bad_request(format!("{name}: {e}")))
}

// ---------------------------------------------------------------- handlers

async fn post_execution(State(st): State<Arc<AppState>>, bytes: Bytes) -> ApiResult {
    let req: NewExecution = body(&bytes)?;
    let mut kb = st.kb.write().await;
    let id = add_planned_execution_data(&mut kb, &req)?;
    created(json!({ "executionId": id, "revision": kb.revision() }))
}

async fn patch_execution(State(st): State<Arc<AppState>>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let patch: ExecutionPatch = body(&bytes)?;
    let mut kb = st.kb.write().await;
    let exec = update_execution_data(&mut kb, &id, &patch)?;
    ok(json!({ "executionId": id, "revision": kb.revision(), "execution": exec }))
}

async fn get_execution_h(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    ok(get_execution(&*st.kb.read().await, &id)?)
}

async fn product_status(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    ok(get_product_status(&*st.kb.read().await, &id)?)
}

async fn resource_history(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult {
    let status = match params.get("status") {
        Some(s) => s.parse::<ExecStatus>().map_err(ApiError::bad_request)?,
        None => ExecStatus::Successful,
    };
    ok(get_resource_history(&*st.kb.read().await, &id, status)?)
}

/// Partial performance update; absent metrics keep their current value.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PerformancePatch {
    #[serde(default)]
    pub plan: Option<String>,
    #[serde(default, with = "rust_decimal::serde::float_option")]
    pub duration_min: Option<Decimal>,
    #[serde(default, with = "rust_decimal::serde::float_option")]
    pub energy_kwh: Option<Decimal>,
    #[serde(default, with = "rust_decimal::serde::float_option")]
    pub emissions: Option<Decimal>,
    #[serde(default, with = "rust_decimal::serde::float_option")]
    pub quality: Option<Decimal>,
}

async fn patch_performance(State(st): State<Arc<AppState>>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let p: PerformancePatch = body(&bytes)?;
    let plan = p.plan.as_deref().unwrap_or("P1");
    let mut kb = st.kb.write().await;
    let instance = local_id(&resolve_plan_instance(&kb, &id, plan)?);
    let cur = expected_performance(&kb, &instance)?;
    let new = Performance::new(
        p.duration_min.unwrap_or(cur.duration_min()),
        p.energy_kwh.unwrap_or(cur.energy_kwh()),
        p.emissions.unwrap_or(cur.emissions()),
        p.quality.unwrap_or(cur.quality()),
    )
    .map_err(RuntimeError::from)?;
    change_resource_performance(&mut kb, &id, plan, &new)?;
    ok(json!({ "resourceId": id, "plan": instance, "revision": kb.revision(), "expected": new }))
}

async fn resource_oee(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult {
    let start = time_param(&params, "start")?;
    let end = time_param(&params, "end")?;
    ok(compute_oee(&*st.kb.read().await, &id, start, end)?)
}

async fn post_query(State(st): State<Arc<AppState>>, headers: HeaderMap, text: String) -> ApiResult {
    let q = query::parse(&text)?;
    match &q.form {
        QueryForm::Select(s) => ok(query::eval_select(st.kb.read().await.graph(), s)),
        _ => {
            let allowed = headers
                .get(WRITE_HEADER)
                .and_then(|v| v.to_str().ok())
                .is_some_and(|v| v.eq_ignore_ascii_case("true"));
            if !allowed {
                return Err(ApiError::new(
                    StatusCode::FORBIDDEN,
                    "WriteNotAllowed",
                    "updates require the X-Write: true header",
                ));
            }
            let mut kb = st.kb.write().await;
            let changes = query::plan_update(kb.graph(), &q)?;
            let stats = kb.apply(&changes).map_err(QueryError::from)?;
            ok(json!({ "inserted": stats.inserted, "deleted": stats.deleted, "revision": kb.revision() }))
        }
    }
}

async fn post_build(State(st): State<Arc<AppState>>, mut multipart: Multipart) -> ApiResult {
    let mut files = BTreeMap::new();
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(format!("multipart: {e}")))?
    {
        let name = field
            .file_name()
            .or(field.name())
            .map(|n| n.rsplit('/').next().unwrap_or(n).to_string())
            .ok_or_else(|| ApiError::bad_request("multipart part without a name"))?;
        let text = field
            .text()
            .await
            .map_err(|e| ApiError::bad_request(format!("multipart: {e}")))?;
        files.insert(name, text);
    }
    let pd = parse_csv_bundle(&files)?;
    let mut kb = st.kb.write().await;
    let stats = build_abox(&mut kb, &pd)?;
    ok(json!({
        "resources": pd.resources.len(),
        "inserted": stats.inserted,
        "deleted": stats.deleted,
        "revision": kb.revision(),
    }))
}

async fn dump(State(st): State<Arc<AppState>>) -> Response {
    let text = st.kb.read().await.dump_turtle();
    ([(header::CONTENT_TYPE, "text/turtle; charset=utf-8")], text).into_response()
}
