use std::time::{Duration, Instant};

use aucpower::ingest::{example_pilot, EXAMPLE_PILOT_CSV};
use aucpower::report::{self, Query};
use aucpower::McConfig;
use aucpower_service::{app, Limits, ServiceConfig};
use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn service() -> Router {
    app(ServiceConfig::default())
}

async fn send(router: Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = router.oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    (status, body.to_vec())
}

async fn post_raw(router: Router, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.into())
        .unwrap();
    send(router, req).await
}

async fn post(uri: &str, body: Value) -> (StatusCode, Value) {
    let (status, bytes) = post_raw(service(), uri, body.to_string()).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn example_arrays() -> Value {
    let (pilot, _) = example_pilot();
    json!({
        "labels": pilot.labels(),
        "scores_a": pilot.scores_a(),
        "scores_b": pilot.scores_b(),
    })
}

fn with(mut base: Value, extra: Value) -> Value {
    for (k, v) in extra.as_object().unwrap() {
        base[k] = v.clone();
    }
    base
}

const BOUNDARY: &str = "XaucpowerX";

fn multipart(parts: &[(&str, &str)]) -> Request<Body> {
    let mut body = String::new();
    for (name, content) in parts {
        body.push_str(&format!(
            "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\n\r\n{content}\r\n"
        ));
    }
    body.push_str(&format!("--{BOUNDARY}--\r\n"));
    Request::post("/api/v1/power/pilot/upload")
        .header(
            header::CONTENT_TYPE,
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(Body::from(body))
        .unwrap()
}

#[tokio::test]
async fn health_reports_version() {
    let req = Request::get("/health").body(Body::empty()).unwrap();
    let (status, body) = send(service(), req).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[tokio::test]
async fn health_under_concurrent_load() {
    let router = service();
    let calls = (0..64).map(|_| {
        let r = router.clone();
        tokio::spawn(async move {
            send(r, Request::get("/health").body(Body::empty()).unwrap())
                .await
                .0
        })
    });
    for c in calls {
        assert_eq!(c.await.unwrap(), StatusCode::OK);
    }
}

#[tokio::test]
async fn single_case_study() {
    let (status, v) = post(
        "/api/v1/sample-size/single",
        json!({"auroc": 0.81, "prevalence": 0.2, "ci_width": 0.1}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let n = v["results"]["n_total"].as_u64().unwrap();
    assert!((448..=452).contains(&n));
}

#[tokio::test]
async fn malformed_body_is_400() {
    let (status, body) =
        post_raw(service(), "/api/v1/sample-size/single", "{\"auroc\": 0.8,").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["error"], "bad_request");
}

#[tokio::test]
async fn boundary_auroc_is_422_with_field() {
    let (status, v) = post(
        "/api/v1/sample-size/single",
        json!({"auroc": 1.0, "prevalence": 0.2, "ci_width": 0.1}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "auroc");

    let (status, v) = post(
        "/api/v1/sample-size/single",
        json!({"auroc": "high", "prevalence": 0.2, "ci_width": 0.1}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "auroc");
}

#[tokio::test]
async fn pilot_inline_matches_library_document() {
    let body = with(
        example_arrays(),
        json!({"n": 400, "seed": 7, "iterations": 300}),
    );
    let (status, bytes) = post_raw(service(), "/api/v1/power/pilot", body.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    let (pilot, summary) = example_pilot();
    let cfg = McConfig {
        iterations: 300,
        ..McConfig::with_seed(7)
    };
    let expected = report::run_pilot(&pilot, summary, None, cfg, Query::Power { n: 400 })
        .unwrap()
        .to_json();
    assert_eq!(String::from_utf8(bytes).unwrap(), expected);
}

#[tokio::test]
async fn omitted_seed_is_generated_and_echoed() {
    let body = with(example_arrays(), json!({"n": 100, "iterations": 50}));
    let (status, v) = post("/api/v1/power/pilot", body).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["inputs"]["config"]["seed"].as_u64().is_some());
}

#[tokio::test]
async fn pilot_validation_errors() {
    let unsorted = with(example_arrays(), json!({"n_grid": [200, 100], "seed": 1}));
    let (status, v) = post("/api/v1/power/pilot", unsorted).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "n_grid");

    let single_class = json!({
        "labels": [true, true, true],
        "scores_a": [0.1, 0.2, 0.3],
        "scores_b": [0.3, 0.2, 0.1],
        "n": 50,
    });
    let (status, v) = post("/api/v1/power/pilot", single_class).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "labels");

    let too_many = with(example_arrays(), json!({"n": 100, "iterations": 20001}));
    let (status, v) = post("/api/v1/power/pilot", too_many).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "iterations");

    let two_queries = with(example_arrays(), json!({"n": 100, "target_power": 0.8}));
    let (status, _) = post("/api/v1/power/pilot", two_queries).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let big_grid: Vec<usize> = (1..=51).map(|k| 10 * k).collect();
    let (status, _) = post(
        "/api/v1/power/pilot",
        with(example_arrays(), json!({"n_grid": big_grid})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn upload_matches_inline() {
    let params = json!({"n": 200, "seed": 3, "iterations": 200, "prevalence": 0.3}).to_string();
    let (status, upload) = send(
        service(),
        multipart(&[("file", EXAMPLE_PILOT_CSV), ("params", &params)]),
    )
    .await;
    assert_eq!(
        status,
        StatusCode::OK,
        "{}",
        String::from_utf8_lossy(&upload)
    );
    let inline = with(
        example_arrays(),
        json!({"n": 200, "seed": 3, "iterations": 200, "prevalence": 0.3}),
    );
    let (_, inline) = post_raw(service(), "/api/v1/power/pilot", inline.to_string()).await;
    assert_eq!(upload, inline);
}

#[tokio::test]
async fn upload_errors() {
    let (status, body) = send(
        service(),
        multipart(&[("file", "label,pred_a,pred_b\n1,0.2,0.3\n1,0.4,0.1\n")]),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert!(v["message"].as_str().unwrap().contains("one class"));

    let (status, body) = send(
        service(),
        multipart(&[("file", "label,pred_a,pred_b\n1,0.2,0.3\n0,x,0.1\n")]),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert!(v["message"].as_str().unwrap().contains("line 3"));

    let (status, _) = send(service(), multipart(&[("params", "{\"n\": 10}")])).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn oversized_bodies_are_413() {
    let small = app(ServiceConfig {
        limits: Limits {
            max_body_bytes: 1024,
            ..Limits::default()
        },
        ..ServiceConfig::default()
    });
    let body = with(example_arrays(), json!({"n": 100}));
    let (status, _) = post_raw(small.clone(), "/api/v1/power/pilot", body.to_string()).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    let (status, _) = send(small, multipart(&[("file", EXAMPLE_PILOT_CSV)])).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
}

fn case_study() -> Value {
    json!({
        "mu_case_a": 0.44, "mu_case_b": 0.41,
        "mu_ctrl_a": 0.17, "mu_ctrl_b": 0.17,
        "phi": 0.2,
    })
}

#[tokio::test]
async fn binormal_power_echoes_aurocs() {
    let body = with(
        case_study(),
        json!({"n": 300, "iterations": 200, "seed": 4}),
    );
    let (status, v) = post("/api/v1/power/binormal", body).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["results"]["anticipated_auroc"]["a"].as_f64().unwrap() > 0.5);
    assert_eq!(v["inputs"]["spec"]["v_case_a"], 0.9);
    assert_eq!(v["results"]["outcome"]["estimate"]["iterations"], 200);
}

#[tokio::test]
async fn binormal_accepts_prevalence_alias() {
    let mut spec = case_study();
    spec.as_object_mut().unwrap().remove("phi");
    spec["prevalence"] = json!(0.2);
    let (status, v) = post(
        "/api/v1/binormal/preview",
        with(spec, json!({"grid_resolution": 16})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["case_density"]["x"].as_array().unwrap().len(), 16);
}

#[tokio::test]
async fn binormal_rejects_closed_interval() {
    let body = with(case_study(), json!({"r_ctrl": 0.0, "n": 100}));
    let (status, v) = post("/api/v1/power/binormal", body).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "r_ctrl");

    let (status, v) = post(
        "/api/v1/binormal/preview",
        with(case_study(), json!({"r_ctrl": 0.0})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "r_ctrl");
}

#[tokio::test]
async fn preview_case_study_and_symmetric() {
    let (status, v) = post("/api/v1/binormal/preview", case_study()).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["orientation_note"].as_str().unwrap().contains("negated"));
    assert_eq!(v["control_density"]["z"].as_array().unwrap().len(), 64);
    let a = v["anticipated_auroc"]["a"].as_f64().unwrap();
    let b = v["anticipated_auroc"]["b"].as_f64().unwrap();
    assert!(a > b && b > 0.5);

    let symmetric = json!({
        "mu_case_a": 0.3, "mu_case_b": 0.3, "mu_ctrl_a": 0.3, "mu_ctrl_b": 0.3, "phi": 0.4,
    });
    let (_, v) = post("/api/v1/binormal/preview", symmetric).await;
    for m in ["a", "b"] {
        assert!((v["anticipated_auroc"][m].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[tokio::test]
async fn preview_is_fast() {
    let router = service();
    let mut worst = Duration::ZERO;
    for _ in 0..5 {
        let body = case_study().to_string();
        let start = Instant::now();
        let (status, _) = post_raw(router.clone(), "/api/v1/binormal/preview", body).await;
        worst = worst.max(start.elapsed());
        assert_eq!(status, StatusCode::OK);
    }
    assert!(worst < Duration::from_millis(200), "{worst:?}");
}

#[tokio::test]
async fn cors_headers_present() {
    let req = Request::post("/api/v1/sample-size/single")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(
            json!({"auroc": 0.8, "prevalence": 0.2, "ci_width": 0.1}).to_string(),
        ))
        .unwrap();
    let resp = service().oneshot(req).await.unwrap();
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}
