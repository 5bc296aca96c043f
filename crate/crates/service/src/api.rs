use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::sync::Arc;
use std::time::Instant;

use axum::extract::{ConnectInfo, MatchedPath, Path, Query, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use donut_core::bib::{serialize_entry, BibEntry};
use donut_core::query::{search, PageRequest};
use donut_core::taxonomy::{CorpusStats, TagNode};
use donut_core::IndexSnapshot;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::logging::RequestCounts;
use crate::state::{AppState, ReloadError};

/// Error envelope: `{"error": {"code": ..., "message": ...}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn no_snapshot() -> Self {
        ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no_snapshot", "no index is loaded yet")
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code,
                message: &self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn loaded(state: &AppState) -> Result<Arc<IndexSnapshot>, ApiError> {
    state.snapshot().ok_or_else(ApiError::no_snapshot)
}

#[derive(Debug, Deserialize)]
pub struct SearchParams {
    q: Option<String>,
    offset: Option<String>,
    limit: Option<String>,
}

fn parse_param(name: &str, raw: Option<&str>, default: usize) -> Result<usize, ApiError> {
    match raw.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "invalid_parameter", format!("`{name}` must be a non-negative integer"))),
    }
}

async fn search_handler(State(state): State<Arc<AppState>>, Query(params): Query<SearchParams>) -> Response {
    let snapshot = match loaded(&state) {
        Ok(s) => s,
        Err(e) => return e.into_response(),
    };
    let page = match (
        parse_param("offset", params.offset.as_deref(), 0),
        parse_param("limit", params.limit.as_deref(), state.config.default_page_size),
    ) {
        (Ok(offset), Ok(limit)) => PageRequest {
            offset,
            limit: limit.min(state.config.max_page_size),
        },
        (Err(e), _) | (_, Err(e)) => return e.into_response(),
    };
    let q = params.q.unwrap_or_default();
    match search(&snapshot, &q, page) {
        Ok(r) => Json(r).into_response(),
        Err(e) => ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()).into_response(),
    }
}

#[derive(Serialize)]
pub struct EntryResponse<'a> {
    pub generation: u64,
    pub entry: &'a BibEntry,
    pub bibtex: String,
}

async fn entry_handler(State(state): State<Arc<AppState>>, Path(key): Path<String>) -> Response {
    let snapshot = match loaded(&state) {
        Ok(s) => s,
        Err(e) => return e.into_response(),
    };
    match snapshot.entry_by_key(&key) {
        Some(entry) => Json(EntryResponse {
            generation: snapshot.generation(),
            entry,
            bibtex: serialize_entry(entry),
        })
        .into_response(),
        None => ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no entry `{key}`")).into_response(),
    }
}

#[derive(Serialize)]
pub struct TreeResponse {
    pub generation: u64,
    pub area: Vec<TagNode>,
    pub tool: Vec<TagNode>,
    pub input: Vec<TagNode>,
}

async fn tree_handler(State(state): State<Arc<AppState>>) -> ApiResult<TreeResponse> {
    let snapshot = loaded(&state)?;
    let d = state.derived(&snapshot);
    Ok(Json(TreeResponse {
        generation: d.generation,
        area: d.tree.area.clone(),
        tool: d.tree.tool.clone(),
        input: d.tree.input.clone(),
    }))
}

#[derive(Serialize)]
pub struct StatsResponse {
    pub generation: u64,
    pub doc_count: usize,
    pub stats: CorpusStats,
    /// Requests per UTC day and route; nothing else about access is kept.
    pub requests: RequestCounts,
}

async fn stats_handler(State(state): State<Arc<AppState>>) -> ApiResult<StatsResponse> {
    let snapshot = loaded(&state)?;
    let d = state.derived(&snapshot);
    Ok(Json(StatsResponse {
        generation: d.generation,
        doc_count: snapshot.doc_count(),
        stats: d.stats.clone(),
        requests: state.log.as_ref().map(|l| l.request_counts()).unwrap_or_default(),
    }))
}

#[derive(Serialize)]
pub struct ReloadResponse {
    pub generation: u64,
    pub doc_count: usize,
    pub reloaded: bool,
}

fn authorized(state: &AppState, headers: &HeaderMap) -> bool {
    let Some(expected) = state.config.admin_token.as_deref() else { return false };
    let presented = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .unwrap_or("");
    // compare digests so the comparison time does not depend on the token
    Sha256::digest(presented.as_bytes()) == Sha256::digest(expected.as_bytes())
}

async fn reload_handler(State(state): State<Arc<AppState>>, headers: HeaderMap) -> ApiResult<ReloadResponse> {
    if !authorized(&state, &headers) {
        return Err(ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong admin token"));
    }
    let worker = Arc::clone(&state);
    let outcome = tokio::task::spawn_blocking(move || worker.reload())
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    match outcome {
        Ok(o) => Ok(Json(ReloadResponse {
            generation: o.generation,
            doc_count: o.doc_count,
            reloaded: o.reloaded,
        })),
        Err(ReloadError::InProgress) => Err(ApiError::new(StatusCode::CONFLICT, "reload_in_progress", "a reload is already running")),
        Err(e @ ReloadError::Index { .. }) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "index_unreadable", e.to_string())),
    }
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn log_requests(State(state): State<Arc<AppState>>, request: Request, next: Next) -> Response {
    let started = Instant::now();
    let client: IpAddr = request
        .extensions()
        .get::<ConnectInfo<SocketAddr>>()
        .map_or(IpAddr::V4(Ipv4Addr::UNSPECIFIED), |c| c.0.ip());
    let route = request.extensions().get::<MatchedPath>().map_or("unmatched", |m| m.as_str()).to_string();
    let query = request.uri().query().map(str::to_string);
    let response = next.run(request).await;
    if let Some(log) = state.log.as_ref() {
        let elapsed = started.elapsed().as_secs_f64() * 1000.0;
        log.log_request(client, &route, query.as_deref(), response.status().as_u16(), elapsed);
    }
    response
}

fn cors(state: &AppState) -> CorsLayer {
    let origin = match state.config.cors_origin.as_deref().map(HeaderValue::from_str) {
        Some(Ok(v)) => AllowOrigin::exact(v),
        _ => AllowOrigin::any(),
    };
    CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::AUTHORIZATION, header::CONTENT_TYPE])
}

/// All routes, with request logging and CORS.
pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/search", get(search_handler))
        .route("/entry/{key}", get(entry_handler))
        .route("/tags/tree", get(tree_handler))
        .route("/stats", get(stats_handler))
        .route("/admin/reload", post(reload_handler))
        .route_layer(middleware::from_fn_with_state(Arc::clone(&state), log_requests))
        .fallback(any(not_found).layer(middleware::from_fn_with_state(Arc::clone(&state), log_requests)))
        .layer(cors(&state))
        .with_state(state)
}
