use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use netrca_core::diagnosis::PromptMode;
use netrca_core::pipeline::{Pipeline, PipelineError};
use netrca_core::topology::parse_snapshot;
use serde_json::json;

fn error_body(status: StatusCode, message: String, rule: Option<&str>) -> Response {
    let mut body = json!({ "error": message });
    if let Some(rule) = rule {
        body["rule"] = json!(rule);
    }
    (status, Json(body)).into_response()
}

async fn health() -> impl IntoResponse {
    Json(json!({ "status": "ok" }))
}

async fn diagnose(
    State(pipeline): State<Arc<Pipeline>>,
    Query(params): Query<HashMap<String, String>>,
    body: Bytes,
) -> Response {
    let mode = match params.get("mode") {
        Some(m) => match m.parse::<PromptMode>() {
            Ok(mode) => mode,
            Err(e) => return error_body(StatusCode::BAD_REQUEST, e, None),
        },
        None if pipeline.corpus().is_some() => PromptMode::FewShot,
        None => PromptMode::ZeroShot,
    };
    let snapshot = match parse_snapshot(&body) {
        Ok(s) => s,
        Err(e) => return error_body(StatusCode::BAD_REQUEST, e.to_string(), e.rule()),
    };
    let worker = pipeline.clone();
    let outcome = tokio::task::spawn_blocking(move || worker.run(&snapshot, mode)).await;
    match outcome {
        Ok(Ok(result)) => {
            let status = if result.partial {
                StatusCode::BAD_GATEWAY
            } else {
                StatusCode::OK
            };
            tracing::info!(mode = %mode, topology = %result.topology_id, partial = result.partial, "diagnose");
            (status, Json(result)).into_response()
        }
        Ok(Err(e @ (PipelineError::Stat(_) | PipelineError::MissingCorpus))) => {
            error_body(StatusCode::BAD_REQUEST, e.to_string(), None)
        }
        Ok(Err(e)) => error_body(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None),
        Err(e) => error_body(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("worker failed: {e}"),
            None,
        ),
    }
}

pub fn router(pipeline: Pipeline) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/diagnose", post(diagnose))
        .with_state(Arc::new(pipeline))
}

/// Blocks serving requests until interrupted.
pub fn serve(pipeline: Pipeline, bind: &str) -> anyhow::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting runtime")?;
    runtime.block_on(async move {
        let addr: SocketAddr = bind
            .parse()
            .with_context(|| format!("invalid bind address {bind:?}"))?;
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        let local = listener.local_addr()?;
        crate::commands::out(format_args!("listening on http://{local}\n"));
        tracing::info!(%local, "serving");
        axum::serve(listener, router(pipeline))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .context("server failed")
    })
}
