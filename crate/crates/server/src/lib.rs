//! Read-only HTTP front end over a registered database.
//!
//! | route | purpose |
//! |---|---|
//! | `GET /api/search` | keyword search (`q`, `rank`, `interp`, `limit`, `offset`, `format`) |
//! | `GET /api/row/{table}` | the row keyed by the query parameters |
//! | `GET /api/related/{table}/{fk_no}` | rows whose foreign key `fk_no` carries the given values |
//! | `GET /api/schema` | catalog with captions |
//! | `GET /api/tables/{table}` | paged browse of one table |
//! | `GET /`, `GET /assets/*` | user interface |
//!
//! Drill endpoints take `_format`, `_limit` and `_offset` for control so
//! that any column name can be used as a key. Errors are JSON objects with
//! `code`, `message` and `detail`.

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use kwsearch_core::presenter::{render_html, render_json};
use kwsearch_core::{Config, DrillDirection, DrillRequest, Error, OutputFormat, Rendered, SearchRequest, Searcher};

pub struct AppState {
    pub searcher: Searcher,
    /// Directory served under `/assets`; none disables the route.
    pub assets: Option<PathBuf>,
}

pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

pub fn status_of(e: &Error) -> StatusCode {
    if e.is_not_found() {
        StatusCode::NOT_FOUND
    } else if e.is_client_error() {
        StatusCode::BAD_REQUEST
    } else if matches!(e, Error::Timeout { .. }) {
        StatusCode::GATEWAY_TIMEOUT
    } else {
        StatusCode::INTERNAL_SERVER_ERROR
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_of(&self.0);
        if status.is_server_error() {
            tracing::error!(code = self.0.code(), "{}", self.0);
        }
        let body = serde_json::json!({
            "code": self.0.code(),
            "message": self.0.to_string(),
            "detail": self.0.detail(),
        });
        (
            status,
            [(header::CONTENT_TYPE, "application/json")],
            format!("{body}\n"),
        )
            .into_response()
    }
}

fn rendered(r: Rendered) -> Response {
    ([(header::CONTENT_TYPE, r.content_type)], r.body).into_response()
}

type Params = Vec<(String, String)>;

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> kwsearch_core::Result<T> + Send + 'static,
) -> Result<T, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(Error::Unsupported(format!("request task failed: {e}")))),
    }
}

async fn search(State(app): State<Arc<AppState>>, Query(params): Query<Params>) -> Result<Response, ApiError> {
    let req = SearchRequest::from_params(params.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    let out = blocking(move || app.searcher.respond(&req, "")).await?;
    Ok(rendered(out))
}

struct Paging {
    format: OutputFormat,
    limit: Option<usize>,
    offset: usize,
}

fn paging(params: &Params, prefix: &str) -> Result<Paging, Error> {
    let mut p = Paging {
        format: OutputFormat::Json,
        limit: None,
        offset: 0,
    };
    for (k, v) in params {
        let Some(name) = k.strip_prefix(prefix) else { continue };
        match name {
            "format" => {
                p.format = match v.as_str() {
                    "json" => OutputFormat::Json,
                    "html" => OutputFormat::Html,
                    _ => return Err(Error::Validation(format!("format must be json or html, got `{v}`"))),
                }
            }
            "limit" => {
                p.limit = Some(
                    v.parse()
                        .map_err(|_| Error::Validation(format!("limit must be a positive integer, got `{v}`")))?,
                )
            }
            "offset" => {
                p.offset = v
                    .parse()
                    .map_err(|_| Error::Validation(format!("offset must be a non-negative integer, got `{v}`")))?
            }
            _ if prefix.is_empty() => return Err(Error::Validation(format!("unknown parameter `{k}`"))),
            _ => {}
        }
    }
    Ok(p)
}

fn document(doc: &kwsearch_core::ResultDocument, format: OutputFormat) -> Response {
    match format {
        OutputFormat::Html => rendered(Rendered {
            content_type: format.content_type(),
            body: render_html(doc, ""),
        }),
        _ => rendered(Rendered {
            content_type: OutputFormat::Json.content_type(),
            body: render_json(doc),
        }),
    }
}

async fn drill(app: Arc<AppState>, table: String, fk_no: Option<u32>, params: Params) -> Result<Response, ApiError> {
    let paging = paging(&params, "_")?;
    let key_values: Vec<(String, String)> = params.into_iter().filter(|(k, _)| !k.starts_with('_')).collect();
    let req = DrillRequest {
        table,
        key_values,
        direction: if fk_no.is_some() {
            DrillDirection::Referencing
        } else {
            DrillDirection::Row
        },
        fk_no,
    };
    let (limit, offset) = (paging.limit, paging.offset);
    let doc = blocking(move || app.searcher.drill(&req, limit, offset)).await?;
    Ok(document(&doc, paging.format))
}

async fn row(
    State(app): State<Arc<AppState>>,
    UrlPath(table): UrlPath<String>,
    Query(params): Query<Params>,
) -> Result<Response, ApiError> {
    drill(app, table, None, params).await
}

async fn related(
    State(app): State<Arc<AppState>>,
    UrlPath((table, fk_no)): UrlPath<(String, String)>,
    Query(params): Query<Params>,
) -> Result<Response, ApiError> {
    let n = fk_no
        .parse()
        .map_err(|_| Error::Validation(format!("foreign key number must be a positive integer, got `{fk_no}`")))?;
    drill(app, table, Some(n), params).await
}

async fn schema(State(app): State<Arc<AppState>>) -> Response {
    rendered(Rendered {
        content_type: OutputFormat::Json.content_type(),
        body: render_json(&app.searcher.schema_document()),
    })
}

async fn browse(
    State(app): State<Arc<AppState>>,
    UrlPath(table): UrlPath<String>,
    Query(params): Query<Params>,
) -> Result<Response, ApiError> {
    let paging = paging(&params, "")?;
    let (limit, offset) = (paging.limit, paging.offset);
    let doc = blocking(move || app.searcher.browse(&table, limit, offset)).await?;
    Ok(document(&doc, paging.format))
}

const INDEX: &str = r#"<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>Keyword search</title>
<style>body{font-family:sans-serif;margin:2em}input[type=text]{width:30em}</style>
</head>
<body>
<h1>Keyword search</h1>
<form action="/api/search" method="get">
<input type="hidden" name="format" value="html">
<input type="text" name="q" autofocus>
<select name="rank"><option value="none">no ranking</option><option value="fk_count">most related first</option><option value="app_sort">application order</option></select>
<select name="interp"><option value="best">best reading</option><option value="all">all readings</option></select>
<button type="submit">Search</button>
</form>
<p><a href="/api/schema">Schema</a></p>
</body>
</html>
"#;

async fn index(State(app): State<Arc<AppState>>) -> Response {
    if let Some(dir) = &app.assets {
        if let Ok(body) = tokio::fs::read(dir.join("index.html")).await {
            return ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], body).into_response();
        }
    }
    ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], INDEX).into_response()
}

fn content_type_for(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json" | "map") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("ico") => "image/x-icon",
        Some("woff2") => "font/woff2",
        _ => "application/octet-stream",
    }
}

async fn asset(State(app): State<Arc<AppState>>, UrlPath(rest): UrlPath<String>) -> Result<Response, ApiError> {
    let missing = || ApiError(Error::UnknownTable(format!("asset {rest}")));
    let dir = app.assets.as_ref().ok_or_else(missing)?;
    let rel = Path::new(&rest);
    if !rel.components().all(|c| matches!(c, Component::Normal(_))) {
        return Err(missing());
    }
    let path = dir.join(rel);
    let body = tokio::fs::read(&path).await.map_err(|_| missing())?;
    Ok(([(header::CONTENT_TYPE, content_type_for(&path))], body).into_response())
}

async fn not_found() -> Response {
    let body = serde_json::json!({"code": "not_found", "message": "no such endpoint", "detail": null});
    (
        StatusCode::NOT_FOUND,
        [(header::CONTENT_TYPE, "application/json")],
        format!("{body}\n"),
    )
        .into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/assets/{*path}", get(asset))
        .route("/api/search", get(search))
        .route("/api/row/{table}", get(row))
        .route("/api/related/{table}/{fk_no}", get(related))
        .route("/api/schema", get(schema))
        .route("/api/tables/{table}", get(browse))
        .fallback(not_found)
        .with_state(state)
}

/// Open the store named by the configuration and serve until interrupted.
pub async fn serve(config: Config, assets: Option<PathBuf>) -> kwsearch_core::Result<()> {
    let addr: SocketAddr = format!("{}:{}", config.bind, config.port)
        .parse()
        .map_err(|e| Error::Config(format!("bind address: {e}")))?;
    let searcher = tokio::task::spawn_blocking(move || Searcher::open(config))
        .await
        .map_err(|e| Error::Config(e.to_string()))??;
    let state = Arc::new(AppState { searcher, assets });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
