//! `POST /parse?id=<page id>` with an image body returns the same JSON that
//! `anchordoc parse` writes to `<id>.json`. `GET /health` answers `ok`.

use std::io::Write;
use std::sync::Arc;

use anchordoc::backend::ModelBackend;
use anchordoc::pipeline::PipelineConfig;
use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use serde_json::json;

use crate::config::{self, EnvConfig};
use crate::parse::parse_bytes;
use crate::{CliError, ServeArgs, EXIT_OK};

pub struct ServeState {
    pub backend: Arc<dyn ModelBackend>,
    pub config: PipelineConfig,
}

#[derive(Debug, Deserialize)]
struct ParseQuery {
    id: Option<String>,
}

fn error(status: StatusCode, message: String) -> Response {
    (status, axum::Json(json!({ "error": message }))).into_response()
}

async fn parse_handler(
    State(state): State<Arc<ServeState>>,
    Query(query): Query<ParseQuery>,
    body: Bytes,
) -> Response {
    if body.is_empty() {
        return error(StatusCode::BAD_REQUEST, "empty request body".into());
    }
    let id = query.id.unwrap_or_else(|| "page".to_string());
    let result = tokio::task::spawn_blocking(move || {
        parse_bytes(&id, &body, state.backend.as_ref(), &state.config)
    })
    .await;
    match result {
        Ok(Ok(doc)) => ([(header::CONTENT_TYPE, "application/json")], doc.to_json()).into_response(),
        Ok(Err(e)) if e.starts_with("image error") => error(StatusCode::BAD_REQUEST, e),
        Ok(Err(e)) => error(StatusCode::BAD_GATEWAY, e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

pub fn router(state: Arc<ServeState>) -> Router {
    Router::new()
        .route("/parse", post(parse_handler))
        .route("/health", get(|| async { "ok" }))
        .with_state(state)
}

/// Binds, prints `listening on http://<addr>` to stdout, and serves until
/// interrupted.
pub fn cmd_serve(args: &ServeArgs, env: &EnvConfig) -> Result<i32, CliError> {
    let resolved = config::resolve(&args.pipeline, None, env)?;
    let backend = config::build_backend(&resolved)?;
    let state = Arc::new(ServeState {
        backend,
        config: resolved.pipeline,
    });
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::io("tokio runtime", e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&args.addr)
            .await
            .map_err(|e| CliError::io(&args.addr, e))?;
        let addr = listener.local_addr().map_err(|e| CliError::io(&args.addr, e))?;
        println!("listening on http://{addr}");
        let _ = std::io::stdout().flush();
        tracing::info!(%addr, "serving");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::io("server", e))?;
        Ok(EXIT_OK)
    })
}
