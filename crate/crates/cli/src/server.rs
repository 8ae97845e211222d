//! Read-only JSON API over one path document.
//!
//! - `GET /api/path` returns the document exactly as it was read from disk.
//! - `GET /api/fsr?lambda_index=i` returns the slice at grid point `i`
//!   (404 past the end of the grid, 400 for a missing or malformed index).
//! - `GET /` returns `index.html` from the static directory, or a stub page.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use pseudofsr::{FsrError, PathDocument};
use serde::Deserialize;

const PLACEHOLDER: &str = "<!doctype html>\n<html><head><title>pseudofsr</title></head><body>\n\
<p>No explorer bundle is installed. The data is available at <a href=\"/api/path\">/api/path</a> \
and <a href=\"/api/fsr?lambda_index=0\">/api/fsr?lambda_index=0</a>.</p>\n</body></html>\n";

/// A loaded document, immutable for the life of the server.
pub struct Served {
    raw: Bytes,
    doc: PathDocument,
    static_dir: Option<PathBuf>,
}

impl Served {
    pub fn new(raw: Vec<u8>, static_dir: Option<PathBuf>) -> Result<Self, FsrError> {
        let text = std::str::from_utf8(&raw)
            .map_err(|e| FsrError::InvalidConfig(format!("path document is not UTF-8: {e}")))?;
        let doc = PathDocument::from_json(text)?;
        Ok(Self { raw: Bytes::from(raw), doc, static_dir })
    }

    pub fn document(&self) -> &PathDocument {
        &self.doc
    }
}

pub fn router(state: Arc<Served>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/path", get(path))
        .route("/api/fsr", get(fsr))
        .with_state(state)
}

fn error(status: StatusCode, message: String) -> Response {
    (status, Json(serde_json::json!({ "error": message }))).into_response()
}

async fn path(State(s): State<Arc<Served>>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], s.raw.clone()).into_response()
}

#[derive(Deserialize)]
struct FsrQuery {
    lambda_index: usize,
}

async fn fsr(State(s): State<Arc<Served>>, query: Result<Query<FsrQuery>, QueryRejection>) -> Response {
    let i = match query {
        Ok(Query(q)) => q.lambda_index,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.body_text()),
    };
    match s.doc.slice(i) {
        Some(slice) => Json(slice).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("lambda_index {i} is outside 0..{}", s.doc.m())),
    }
}

async fn index(State(s): State<Arc<Served>>) -> Response {
    if let Some(dir) = &s.static_dir {
        if let Ok(page) = tokio::fs::read_to_string(dir.join("index.html")).await {
            return Html(page).into_response();
        }
    }
    Html(PLACEHOLDER).into_response()
}
