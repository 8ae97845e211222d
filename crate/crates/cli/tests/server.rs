use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use ndarray::Array2;
use pseudofsr::{estimate_fsr, rng, DesignMatrix, FsrConfig, FsrSlice, PathDocument, Response};
use pseudofsr_cli::server::{router, Served};
use rand::Rng;
use rand_distr::StandardNormal;
use tower::ServiceExt;

fn document() -> PathDocument {
    let mut r = rng::stream(3);
    let x = Array2::from_shape_fn((60, 5), |_| r.sample::<f64, _>(StandardNormal));
    let y: Vec<f64> = (0..60).map(|i| 1.5 * x[[i, 0]] - x[[i, 2]] + r.sample::<f64, _>(StandardNormal)).collect();
    let x = DesignMatrix::from_array(x).unwrap();
    let cfg = FsrConfig { b_replicates: 5, lambda_count: 20, alpha_targets: vec![0.1, 0.2], ..FsrConfig::default() };
    let curve = estimate_fsr(x.view(), &Response::continuous(y).unwrap(), &cfg).unwrap();
    PathDocument::from_curve(&curve, &x, &cfg)
}

/// Router over a document written to disk, plus the exact file bytes.
fn serve_doc(static_dir: Option<std::path::PathBuf>) -> (Router, Vec<u8>, PathDocument) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("doc.json");
    let doc = document();
    doc.write_file(&path).unwrap();
    let raw = std::fs::read(&path).unwrap();
    let served = Served::new(raw.clone(), static_dir).unwrap();
    (router(Arc::new(served)), raw, doc)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let status = res.status();
    (status, to_bytes(res.into_body(), usize::MAX).await.unwrap().to_vec())
}

#[tokio::test]
async fn path_endpoint_returns_file_bytes() {
    let (app, raw, _) = serve_doc(None);
    let (status, body) = get(&app, "/api/path").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, raw);
}

#[tokio::test]
async fn first_grid_point_is_the_null_model() {
    let (app, _, _) = serve_doc(None);
    let (status, body) = get(&app, "/api/fsr?lambda_index=0").await;
    assert_eq!(status, StatusCode::OK);
    let slice: FsrSlice = serde_json::from_slice(&body).unwrap();
    assert_eq!(slice.lambda_index, 0);
    assert!(slice.coefficients.iter().all(|&c| c == 0.0));
    assert!(slice.active_set.is_empty());
    assert_eq!(slice.fsr_mean, 0.0);
}

#[tokio::test]
async fn slices_agree_with_the_document() {
    let (app, _, doc) = serve_doc(None);
    for i in [1, doc.m() / 2, doc.m() - 1] {
        let (status, body) = get(&app, &format!("/api/fsr?lambda_index={i}")).await;
        assert_eq!(status, StatusCode::OK);
        let slice: FsrSlice = serde_json::from_slice(&body).unwrap();
        assert_eq!(slice, doc.slice(i).unwrap());
        assert_eq!(slice.fsr_per_replicate.len(), 5);
    }
}

#[tokio::test]
async fn bad_indices_are_rejected() {
    let (app, _, doc) = serve_doc(None);
    let (status, _) = get(&app, &format!("/api/fsr?lambda_index={}", doc.m())).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    for uri in ["/api/fsr", "/api/fsr?lambda_index=abc", "/api/fsr?lambda_index=-1", "/api/fsr?lambda_index=1.5"] {
        let (status, body) = get(&app, uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        let err: serde_json::Value = serde_json::from_slice(&body).unwrap();
        assert!(err["error"].is_string());
    }
}

#[tokio::test]
async fn root_serves_bundle_or_placeholder() {
    let (app, _, _) = serve_doc(None);
    let (status, body) = get(&app, "/").await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().contains("/api/path"));

    let bundle = tempfile::tempdir().unwrap();
    std::fs::write(bundle.path().join("index.html"), "<p>explorer</p>").unwrap();
    let (app, _, _) = serve_doc(Some(bundle.path().to_path_buf()));
    let (_, body) = get(&app, "/").await;
    assert_eq!(body, b"<p>explorer</p>");
}

#[tokio::test]
async fn concurrent_reads_see_the_same_document() {
    let (app, raw, _) = serve_doc(None);
    let requests = (0..16).map(|_| {
        let app = app.clone();
        async move { get(&app, "/api/path").await }
    });
    for (status, body) in futures_join(requests).await {
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body, raw);
    }
}

async fn futures_join<F: std::future::Future>(futs: impl Iterator<Item = F>) -> Vec<F::Output>
where
    F: Send + 'static,
    F::Output: Send + 'static,
{
    let handles: Vec<_> = futs.map(tokio::spawn).collect();
    let mut out = Vec::new();
    for h in handles {
        out.push(h.await.unwrap());
    }
    out
}

#[test]
fn invalid_documents_are_refused() {
    assert!(Served::new(b"{}".to_vec(), None).is_err());
    assert!(Served::new(vec![0xff, 0xfe], None).is_err());
}
