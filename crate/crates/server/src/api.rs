//! HTTP routes.

use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::header::CONTENT_TYPE;
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use synopsviz_core::hierarchy::{
    build_hierarchy_with_limits, ConfigLimits, HierarchyNode, Strategy,
};
use synopsviz_core::metadata::PredicateTable;
use synopsviz_core::points::AxisNumber;
use synopsviz_core::treemap::class_details;
use synopsviz_core::value::format_epoch_millis;
use synopsviz_core::{
    build_treemap, resolve_selection, FacetSelection, HierarchyConfig, HierarchyTree,
    IngestOptions, IngestReport, RdfFormat, ValueKind,
};
use tower_http::cors::CorsLayer;
use tower_http::trace::TraceLayer;

use crate::cache::{CacheStatus, HierarchyCache, HierarchyKey};
use crate::error::ApiError;
use crate::registry::{DataDir, Dataset, Registry};

pub const DEFAULT_POINTS_LIMIT: usize = 200;
pub const MAX_POINTS_LIMIT: usize = 10_000;
pub const CACHE_HEADER: &str = "x-cache";

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub max_triples: Option<usize>,
    pub max_upload_bytes: usize,
    pub cache_capacity: usize,
    pub limits: ConfigLimits,
    pub data_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            max_triples: None,
            max_upload_bytes: 512 * 1024 * 1024,
            cache_capacity: 64,
            limits: ConfigLimits::default(),
            data_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub registry: Arc<Registry>,
    pub cache: Arc<HierarchyCache>,
    pub config: Arc<ServerConfig>,
    pub data_dir: Option<DataDir>,
    pub table: Arc<PredicateTable>,
}

impl AppState {
    /// Opens the data directory (if any) and loads every dataset in it.
    pub fn new(config: ServerConfig, table: PredicateTable) -> std::io::Result<AppState> {
        let registry = Arc::new(Registry::default());
        let data_dir = config.data_dir.as_ref().map(DataDir::open).transpose()?;
        if let Some(dir) = &data_dir {
            dir.load_into(&registry, &ingest_options(&config), &table)?;
        }
        Ok(AppState {
            registry,
            cache: Arc::new(HierarchyCache::new(config.cache_capacity)),
            config: Arc::new(config),
            data_dir,
            table: Arc::new(table),
        })
    }

    fn dataset(&self, id: &str) -> Result<Arc<Dataset>, ApiError> {
        self.registry
            .get(id)
            .ok_or_else(|| ApiError::unknown_dataset(id))
    }
}

fn ingest_options(config: &ServerConfig) -> IngestOptions {
    IngestOptions {
        max_triples: config.max_triples,
    }
}

pub fn router(state: AppState) -> Router {
    let limit = state.config.max_upload_bytes;
    Router::new()
        .route("/datasets", get(list_datasets).post(create_dataset))
        .route("/datasets/{id}", get(dataset_info))
        .route("/datasets/{id}/report", get(report))
        .route("/datasets/{id}/metadata", get(metadata))
        .route("/datasets/{id}/statistics", get(statistics))
        .route("/datasets/{id}/facets", get(facets))
        .route("/datasets/{id}/schema", get(schema))
        .route("/datasets/{id}/treemap", get(treemap))
        .route("/datasets/{id}/classes", get(class_detail))
        .route("/datasets/{id}/hierarchy", get(hierarchy))
        .route("/datasets/{id}/hierarchy/{token}/nodes/{node}", get(node))
        .route(
            "/datasets/{id}/hierarchy/{token}/nodes/{node}/children",
            get(children),
        )
        .route(
            "/datasets/{id}/hierarchy/{token}/nodes/{node}/points",
            get(points),
        )
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such route") })
        .layer(DefaultBodyLimit::max(limit))
        .layer(CorsLayer::permissive())
        .layer(TraceLayer::new_for_http())
        .with_state(state)
}

async fn list_datasets(State(state): State<AppState>) -> impl IntoResponse {
    Json(state.registry.list())
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateQuery {
    name: Option<String>,
    format: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateRequest {
    source_path: String,
    format: Option<String>,
    name: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct Created {
    id: String,
    name: String,
    triple_count: u64,
    created: bool,
    report: IngestReport,
}

fn parse_format(name: &str) -> Result<RdfFormat, ApiError> {
    RdfFormat::from_name(name)
        .ok_or_else(|| ApiError::bad_request(format!("unknown format {name:?}")))
}

fn format_from_content_type(headers: &HeaderMap) -> Option<RdfFormat> {
    let ct = headers.get(CONTENT_TYPE)?.to_str().ok()?;
    let mime = ct.split(';').next()?.trim().to_ascii_lowercase();
    match mime.as_str() {
        "text/turtle" | "application/x-turtle" => Some(RdfFormat::Turtle),
        "application/n-triples" | "text/plain" => Some(RdfFormat::NTriples),
        _ => None,
    }
}

/// POST /datasets: either a JSON body `{sourcePath, format?, name?}` naming a
/// file inside the data directory, or the raw file as the request body with
/// `?name=&format=` (format may also come from the content type).
async fn create_dataset(
    State(state): State<AppState>,
    Query(query): Query<CreateQuery>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let body = body.map_err(|r| {
        let status = r.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE {
            "PayloadTooLarge"
        } else {
            "BadRequest"
        };
        ApiError::new(status, code, r.body_text())
    })?;
    let is_json = headers
        .get(CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|ct| ct.starts_with("application/json"));

    let (name, bytes, format, persist) = if is_json {
        let req: CreateRequest = serde_json::from_slice(&body)
            .map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))?;
        let dir = state.data_dir.as_ref().ok_or_else(|| {
            ApiError::bad_request("sourcePath requires the server to run with a data directory")
        })?;
        let path = dir.resolve(&req.source_path).ok_or_else(|| {
            ApiError::bad_request(format!(
                "sourcePath {:?} is not a file in the data directory",
                req.source_path
            ))
        })?;
        let format = match req.format.as_deref().or(query.format.as_deref()) {
            Some(f) => parse_format(f)?,
            None => RdfFormat::from_path(&path)
                .ok_or_else(|| ApiError::bad_request("cannot infer the format; pass `format`"))?,
        };
        let bytes = tokio::fs::read(&path).await.map_err(|e| {
            ApiError::new(StatusCode::BAD_REQUEST, "UnreadableSource", e.to_string())
        })?;
        let name = req.name.or(query.name).unwrap_or_else(|| stem(&path));
        (name, Bytes::from(bytes), format, false)
    } else {
        let format = match query.format.as_deref() {
            Some(f) => parse_format(f)?,
            None => format_from_content_type(&headers)
                .ok_or_else(|| ApiError::bad_request("cannot infer the format; pass `format`"))?,
        };
        (
            query.name.unwrap_or_else(|| "upload".to_owned()),
            body,
            format,
            true,
        )
    };

    let options = ingest_options(&state.config);
    let table = Arc::clone(&state.table);
    let load_name = name.clone();
    let load_bytes = bytes.clone();
    let dataset = tokio::task::spawn_blocking(move || {
        Dataset::load(&load_name, &load_bytes, format, &options, &table)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    if dataset.store.is_empty() {
        return Err(
            ApiError::empty_dataset().with_detail(json!({ "report": dataset.store.report() }))
        );
    }
    if persist {
        if let Some(dir) = state.data_dir.clone() {
            let (n, b) = (name.clone(), bytes.clone());
            tokio::task::spawn_blocking(move || dir.add(&n, &b, format))
                .await
                .map_err(|e| ApiError::internal(e.to_string()))?
                .map_err(|e| ApiError::internal(format!("cannot store the dataset: {e}")))?;
        }
    }
    let report = dataset.store.report().clone();
    let (entry, created) = state.registry.insert(dataset);
    let status = if created {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    let body = Created {
        id: entry.id.clone(),
        name: entry.name.clone(),
        triple_count: entry.store.len() as u64,
        created,
        report,
    };
    Ok((status, Json(body)).into_response())
}

fn stem(path: &FsPath) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_owned())
}

async fn dataset_info(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(Json(state.dataset(&id)?.listing()).into_response())
}

async fn report(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(Json(state.dataset(&id)?.store.report()).into_response())
}

async fn metadata(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(Json(&state.dataset(&id)?.metadata).into_response())
}

async fn statistics(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(Json(&state.dataset(&id)?.stats).into_response())
}

async fn facets(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(Json(&state.dataset(&id)?.facets).into_response())
}

async fn schema(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(Json(&state.dataset(&id)?.summary).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct TreemapQuery {
    root: Option<String>,
    depth: Option<u32>,
}

async fn treemap(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<TreemapQuery>,
) -> Result<Response, ApiError> {
    let d = state.dataset(&id)?;
    let root = q.root.filter(|r| !r.is_empty());
    let tree = tokio::task::spawn_blocking(move || {
        build_treemap(&d.store, &d.summary, root.as_deref(), q.depth)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(tree).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct ClassQuery {
    iri: Option<String>,
}

/// Full enrichment of one class, including property details the treemap
/// deferred. Without `iri`, the synthetic root.
async fn class_detail(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ClassQuery>,
) -> Result<Response, ApiError> {
    let d = state.dataset(&id)?;
    let iri = q.iri.filter(|r| !r.is_empty());
    let details =
        tokio::task::spawn_blocking(move || class_details(&d.store, &d.summary, iri.as_deref()))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(details).into_response())
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
struct HierarchyQuery {
    property: Option<String>,
    /// Comma-separated class IRIs.
    classes: Option<String>,
    strategy: Option<String>,
    levels: Option<u32>,
    fanout: Option<u32>,
    sample_size: Option<u32>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct HierarchyResponse<'a> {
    tree_token: String,
    dataset_id: &'a str,
    selection: &'a FacetSelection,
    config: &'a HierarchyConfig,
    axis: ValueKind,
    point_count: usize,
    excluded_literals: u64,
    root: HierarchyNode,
    children: Vec<HierarchyNode>,
}

fn hierarchy_key(
    dataset_id: &str,
    q: HierarchyQuery,
    limits: &ConfigLimits,
) -> Result<HierarchyKey, ApiError> {
    let property = q
        .property
        .filter(|p| !p.is_empty())
        .ok_or_else(|| ApiError::bad_request("the `property` parameter is required"))?;
    let classes: Vec<String> = q
        .classes
        .iter()
        .flat_map(|c| c.split(','))
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(str::to_owned)
        .collect();
    let defaults = HierarchyConfig::default();
    let config = HierarchyConfig {
        strategy: match q.strategy.as_deref() {
            Some(s) => s.parse::<Strategy>()?,
            None => defaults.strategy,
        },
        levels: q.levels.unwrap_or(defaults.levels),
        fanout: q.fanout.unwrap_or(defaults.fanout),
        sample_size: q.sample_size.unwrap_or(defaults.sample_size),
    };
    config.validate(limits)?;
    Ok(HierarchyKey {
        dataset_id: dataset_id.to_owned(),
        selection: FacetSelection::property(property).with_classes(classes),
        config,
    })
}

async fn tree_for(
    state: &AppState,
    dataset: Arc<Dataset>,
    key: &HierarchyKey,
) -> Result<(Arc<HierarchyTree>, CacheStatus), ApiError> {
    let selection = key.selection.clone();
    let config = key.config;
    let limits = state.config.limits;
    state
        .cache
        .get_or_build(key, move || {
            let points = resolve_selection(&dataset.store, &dataset.summary, &selection)?;
            Ok(build_hierarchy_with_limits(points, config, &limits)?)
        })
        .await
}

fn with_cache_header(mut response: Response, status: CacheStatus) -> Response {
    response
        .headers_mut()
        .insert(CACHE_HEADER, HeaderValue::from_static(status.as_str()));
    response
}

async fn hierarchy(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HierarchyQuery>,
) -> Result<Response, ApiError> {
    let dataset = state.dataset(&id)?;
    let key = hierarchy_key(&id, q, &state.config.limits)?;
    let (tree, status) = tree_for(&state, dataset, &key).await?;
    let body = HierarchyResponse {
        tree_token: key.token(),
        dataset_id: &id,
        selection: &key.selection,
        config: &key.config,
        axis: tree.axis_kind(),
        point_count: tree.point_set().len(),
        excluded_literals: tree.point_set().excluded(),
        root: tree.root(),
        children: tree.children_of("")?,
    };
    Ok(with_cache_header(Json(body).into_response(), status))
}

/// Looks up a token of this dataset, rebuilding an evicted tree.
async fn tree_by_token(
    state: &AppState,
    id: &str,
    token: &str,
) -> Result<(Arc<HierarchyTree>, CacheStatus), ApiError> {
    let dataset = state.dataset(id)?;
    let key = state
        .cache
        .key_for(token)
        .filter(|k| k.dataset_id == id)
        .ok_or_else(|| ApiError::unknown_token(token))?;
    tree_for(state, dataset, &key).await
}

/// `root` and the empty string both name the root node.
fn node_id(raw: &str) -> &str {
    if raw == "root" {
        ""
    } else {
        raw
    }
}

async fn node(
    State(state): State<AppState>,
    Path((id, token, node)): Path<(String, String, String)>,
) -> Result<Response, ApiError> {
    let (tree, status) = tree_by_token(&state, &id, &token).await?;
    Ok(with_cache_header(
        Json(tree.node(node_id(&node))?).into_response(),
        status,
    ))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ChildrenResponse<'a> {
    tree_token: &'a str,
    node_id: &'a str,
    children: Vec<HierarchyNode>,
}

async fn children(
    State(state): State<AppState>,
    Path((id, token, node)): Path<(String, String, String)>,
) -> Result<Response, ApiError> {
    let (tree, status) = tree_by_token(&state, &id, &token).await?;
    let node_id = node_id(&node);
    let body = ChildrenResponse {
        tree_token: &token,
        node_id,
        children: tree.children_of(node_id)?,
    };
    Ok(with_cache_header(Json(body).into_response(), status))
}

#[derive(Debug, Default, Deserialize)]
struct PageQuery {
    limit: Option<usize>,
    offset: Option<usize>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PointView {
    subject: String,
    value: AxisNumber,
    #[serde(skip_serializing_if = "Option::is_none")]
    value_iso: Option<String>,
    /// Store position of the originating triple.
    source: u32,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PointsResponse<'a> {
    tree_token: &'a str,
    node_id: &'a str,
    total: usize,
    offset: usize,
    limit: usize,
    points: Vec<PointView>,
}

async fn points(
    State(state): State<AppState>,
    Path((id, token, node)): Path<(String, String, String)>,
    Query(page): Query<PageQuery>,
) -> Result<Response, ApiError> {
    let limit = page.limit.unwrap_or(DEFAULT_POINTS_LIMIT);
    if limit == 0 || limit > MAX_POINTS_LIMIT {
        return Err(ApiError::bad_request(format!(
            "limit must be within 1..={MAX_POINTS_LIMIT}"
        )));
    }
    let offset = page.offset.unwrap_or(0);
    let (tree, status) = tree_by_token(&state, &id, &token).await?;
    let node_id = node_id(&node);
    let all = tree.points_of(node_id)?;
    let kind = tree.axis_kind();
    let points = all
        .iter()
        .skip(offset)
        .take(limit)
        .map(|p| PointView {
            subject: p.subject.display_text(),
            value: AxisNumber(p.value),
            value_iso: (kind == ValueKind::Temporal).then(|| format_epoch_millis(p.value as i64)),
            source: p.source,
        })
        .collect();
    let body = PointsResponse {
        tree_token: &token,
        node_id,
        total: all.len(),
        offset,
        limit,
        points,
    };
    Ok(with_cache_header(Json(body).into_response(), status))
}
