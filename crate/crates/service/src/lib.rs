//! HTTP JSON API for the aucpower calculators.
//!
//! Successful responses are the same versioned result documents the CLI
//! prints with `--json`, byte for byte. Monte Carlo requests without a
//! `seed` get one generated by the server, and it is echoed in
//! `inputs.config.seed`.
//!
//! Routes:
//!
//! * `GET  /health`
//! * `POST /api/v1/sample-size/single`
//! * `POST /api/v1/power/pilot` (inline `labels`, `scores_a`, `scores_b`)
//! * `POST /api/v1/power/pilot/upload` (multipart: `file`, optional `params`)
//! * `POST /api/v1/power/binormal`
//! * `POST /api/v1/binormal/preview`

pub mod error;

use axum::extract::{DefaultBodyLimit, Multipart, State};
use axum::http::{header, HeaderValue, Method};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use aucpower::binormal::BinormalSpec;
use aucpower::ingest::{parse_pilot, PilotFileSpec, PilotSummary};
use aucpower::montecarlo::validate_grid;
use aucpower::report::{self, query_from_parts, Query};
use aucpower::rng::fresh_seed;
use aucpower::{McConfig, PilotDataset, SearchOptions, SingleSizeRequest};

pub use error::{ApiError, ApiJson, FieldError};

pub const DEFAULT_PREVIEW_RESOLUTION: usize = 64;

/// Caps protecting the service from runaway requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_iterations: usize,
    pub max_grid_points: usize,
    /// Largest simulated sample size, including the search's `n_max`.
    pub max_n: usize,
    pub max_body_bytes: usize,
    pub max_preview_resolution: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            max_grid_points: 50,
            max_n: 200_000,
            max_body_bytes: 16 * 1024 * 1024,
            max_preview_resolution: 256,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub limits: Limits,
    /// Origins allowed by CORS; empty allows any origin.
    pub cors_origins: Vec<String>,
}

/// Simulation settings; anything omitted takes the CLI default.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct McFields {
    pub alpha: Option<f64>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub max_redraws_per_iteration: Option<usize>,
}

impl McFields {
    fn resolve(&self, limits: &Limits) -> Result<McConfig, ApiError> {
        let d = McConfig::default();
        let cfg = McConfig {
            alpha: self.alpha.unwrap_or(d.alpha),
            iterations: self.iterations.unwrap_or(d.iterations),
            seed: self.seed.unwrap_or_else(fresh_seed),
            max_redraws_per_iteration: self
                .max_redraws_per_iteration
                .unwrap_or(d.max_redraws_per_iteration),
        };
        if cfg.iterations > limits.max_iterations {
            return Err(ApiError::invalid(
                Some("iterations"),
                format!("at most {} iterations per request", limits.max_iterations),
            ));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Exactly one of `n`, `n_grid` or `target_power`.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct QueryFields {
    pub n: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub target_power: Option<f64>,
    #[serde(default)]
    pub search: SearchOptions,
}

impl QueryFields {
    fn resolve(&self, limits: &Limits) -> Result<Query, ApiError> {
        let too_big = |field: &str| {
            ApiError::invalid(
                Some(field),
                format!("sample sizes above {} are not served", limits.max_n),
            )
        };
        if self.n.is_some_and(|n| n > limits.max_n) {
            return Err(too_big("n"));
        }
        if let Some(grid) = &self.n_grid {
            validate_grid(grid)?;
            if grid.len() > limits.max_grid_points {
                return Err(ApiError::invalid(
                    Some("n_grid"),
                    format!("at most {} grid points per request", limits.max_grid_points),
                ));
            }
            if grid.last().is_some_and(|&n| n > limits.max_n) {
                return Err(too_big("n_grid"));
            }
        }
        if self.target_power.is_some() && self.search.n_max > limits.max_n {
            return Err(too_big("search.n_max"));
        }
        query_from_parts(self.n, self.n_grid.clone(), self.target_power, self.search)
            .map_err(|m| ApiError::invalid(None, m))
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct PilotRequest {
    pub labels: Vec<bool>,
    pub scores_a: Vec<f64>,
    pub scores_b: Vec<f64>,
    /// Target prevalence for reweighted resampling.
    pub prevalence: Option<f64>,
    #[serde(flatten)]
    pub mc: McFields,
    #[serde(flatten)]
    pub query: QueryFields,
}

/// The `params` part of an upload: a [`PilotRequest`] without the data,
/// plus how to read the file.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct UploadParams {
    pub prevalence: Option<f64>,
    pub label_column: Option<String>,
    pub score_a_column: Option<String>,
    pub score_b_column: Option<String>,
    pub delimiter: Option<char>,
    #[serde(default)]
    pub lenient: bool,
    #[serde(flatten)]
    pub mc: McFields,
    #[serde(flatten)]
    pub query: QueryFields,
}

impl UploadParams {
    fn file_spec(&self) -> Result<PilotFileSpec, ApiError> {
        let d = PilotFileSpec::default();
        let delimiter = match self.delimiter {
            None => d.delimiter,
            Some(c) if c.is_ascii() => c as u8,
            Some(_) => {
                return Err(ApiError::invalid(
                    Some("delimiter"),
                    "delimiter must be a single ASCII character",
                ))
            }
        };
        Ok(PilotFileSpec {
            label_column: self.label_column.clone().unwrap_or(d.label_column),
            score_a_column: self.score_a_column.clone().unwrap_or(d.score_a_column),
            score_b_column: self.score_b_column.clone().unwrap_or(d.score_b_column),
            delimiter,
            lenient: self.lenient,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct BinormalRequest {
    #[serde(flatten)]
    pub spec: BinormalSpec,
    #[serde(flatten)]
    pub mc: McFields,
    #[serde(flatten)]
    pub query: QueryFields,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PreviewRequest {
    #[serde(flatten)]
    pub spec: BinormalSpec,
    pub grid_resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub tool: String,
    pub version: String,
}

fn json_document(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        tool: report::TOOL_NAME.into(),
        version: report::TOOL_VERSION.into(),
    })
}

async fn single(ApiJson(req): ApiJson<SingleSizeRequest>) -> Result<Response, ApiError> {
    Ok(json_document(report::run_single(&req)?.to_json()))
}

fn run_pilot(
    pilot: PilotDataset,
    summary: PilotSummary,
    prevalence: Option<f64>,
    mc: &McFields,
    query: &QueryFields,
    limits: &Limits,
) -> Result<impl FnOnce() -> Result<String, ApiError>, ApiError> {
    let config = mc.resolve(limits)?;
    let query = query.resolve(limits)?;
    Ok(move || Ok(report::run_pilot(&pilot, summary, prevalence, config, query)?.to_json()))
}

async fn pilot(
    State(cfg): State<ServiceConfig>,
    ApiJson(req): ApiJson<PilotRequest>,
) -> Result<Response, ApiError> {
    let pilot = PilotDataset::new(req.labels, req.scores_a, req.scores_b)?;
    let summary = PilotSummary::new(&pilot, Vec::new());
    let job = run_pilot(
        pilot,
        summary,
        req.prevalence,
        &req.mc,
        &req.query,
        &cfg.limits,
    )?;
    Ok(json_document(blocking(job).await?))
}

async fn pilot_upload(
    State(cfg): State<ServiceConfig>,
    mut form: Multipart,
) -> Result<Response, ApiError> {
    let mut file = None;
    let mut params = UploadParams::default();
    let part_error = |e: axum::extract::multipart::MultipartError| ApiError {
        status: e.status(),
        error: if e.status() == axum::http::StatusCode::PAYLOAD_TOO_LARGE {
            "payload_too_large"
        } else {
            "bad_request"
        },
        message: e.body_text(),
        fields: Vec::new(),
    };
    while let Some(field) = form.next_field().await.map_err(part_error)? {
        match field.name() {
            Some("file") => file = Some(field.bytes().await.map_err(part_error)?),
            Some("params") => {
                let bytes = field.bytes().await.map_err(part_error)?;
                params = error::parse_json(&bytes)?;
            }
            other => {
                return Err(ApiError::invalid(
                    other,
                    "unexpected form field; expected `file` and optionally `params`",
                ))
            }
        }
    }
    let file = file.ok_or_else(|| ApiError::invalid(Some("file"), "missing CSV part `file`"))?;
    let (pilot, summary) = parse_pilot(file.as_ref(), &params.file_spec()?)?;
    let job = run_pilot(
        pilot,
        summary,
        params.prevalence,
        &params.mc,
        &params.query,
        &cfg.limits,
    )?;
    Ok(json_document(blocking(job).await?))
}

async fn binormal(
    State(cfg): State<ServiceConfig>,
    ApiJson(req): ApiJson<BinormalRequest>,
) -> Result<Response, ApiError> {
    req.spec.validate()?;
    let config = req.mc.resolve(&cfg.limits)?;
    let query = req.query.resolve(&cfg.limits)?;
    let spec = req.spec;
    let body = blocking(move || Ok(report::run_binormal(&spec, config, query)?.to_json())).await?;
    Ok(json_document(body))
}

async fn preview(
    State(cfg): State<ServiceConfig>,
    ApiJson(req): ApiJson<PreviewRequest>,
) -> Result<Response, ApiError> {
    let resolution = req.grid_resolution.unwrap_or(DEFAULT_PREVIEW_RESOLUTION);
    if resolution > cfg.limits.max_preview_resolution {
        return Err(ApiError::invalid(
            Some("grid_resolution"),
            format!("at most {}", cfg.limits.max_preview_resolution),
        ));
    }
    let preview = report::binormal_preview(&req.spec, resolution)?;
    Ok(Json(preview).into_response())
}

fn cors(origins: &[String]) -> CorsLayer {
    let allow = if origins.is_empty() {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn app(cfg: ServiceConfig) -> Router {
    let body_limit = cfg.limits.max_body_bytes;
    let cors = cors(&cfg.cors_origins);
    Router::new()
        .route("/health", get(health))
        .route("/api/v1/sample-size/single", post(single))
        .route("/api/v1/power/pilot", post(pilot))
        .route("/api/v1/power/pilot/upload", post(pilot_upload))
        .route("/api/v1/power/binormal", post(binormal))
        .route("/api/v1/binormal/preview", post(preview))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(cors)
        .with_state(cfg)
}
