use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{FromRequest, Request};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde::de::DeserializeOwned;
use serde::Serialize;

use aucpower::ingest::IngestError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

/// Error body: `{"error": kind, "message": ..., "fields": [...]}`.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub error: &'static str,
    pub message: String,
    pub fields: Vec<FieldError>,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            error: "bad_request",
            message: message.into(),
            fields: Vec::new(),
        }
    }

    pub fn invalid(field: Option<&str>, message: impl Into<String>) -> Self {
        let message = message.into();
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            error: "validation",
            fields: field
                .map(|f| {
                    vec![FieldError {
                        field: f.to_string(),
                        message: message.clone(),
                    }]
                })
                .unwrap_or_default(),
            message,
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            error: "internal",
            message: message.into(),
            fields: Vec::new(),
        }
    }
}

fn field_of(e: &aucpower::Error) -> Option<&'static str> {
    use aucpower::Error::*;
    match e {
        Domain { name, .. } => Some(name),
        LengthMismatch { what, .. } => Some(what),
        EmptyClass { .. } => Some("labels"),
        NonFiniteScore { .. } => Some("scores"),
        InvalidGrid => Some("n_grid"),
        AtGridPoint { source, .. } => field_of(source),
        TargetUnreachable { .. } => Some("target_power"),
        _ => None,
    }
}

impl From<aucpower::Error> for ApiError {
    fn from(e: aucpower::Error) -> Self {
        ApiError::invalid(field_of(&e), e.to_string())
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        ApiError::invalid(Some("file"), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, axum::Json(&self)).into_response()
    }
}

/// JSON body extractor: malformed JSON is a 400, well-formed JSON with the
/// wrong shape or types is a 422 naming the offending field, and oversized
/// bodies keep their 413.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    S: Send + Sync,
    T: DeserializeOwned,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(body_rejection)?;
        parse_json(&bytes).map(ApiJson)
    }
}

pub(crate) fn body_rejection(r: BytesRejection) -> ApiError {
    let status = r.status();
    ApiError {
        status,
        error: if status == StatusCode::PAYLOAD_TOO_LARGE {
            "payload_too_large"
        } else {
            "bad_request"
        },
        message: r.body_text(),
        fields: Vec::new(),
    }
}

pub(crate) fn parse_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => {
                let field = (path != ".").then_some(path.as_str());
                ApiError::invalid(field, inner.to_string())
            }
            _ => ApiError::bad_request(format!("malformed JSON: {inner}")),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, serde::Deserialize)]
    #[allow(dead_code)]
    struct Body {
        auroc: f64,
    }

    #[test]
    fn syntax_vs_data_errors() {
        let e = parse_json::<Body>(b"{\"auroc\": ").unwrap_err();
        assert_eq!(e.status, StatusCode::BAD_REQUEST);
        let e = parse_json::<Body>(b"{\"auroc\": \"high\"}").unwrap_err();
        assert_eq!(e.status, StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(e.fields[0].field, "auroc");
        let e = parse_json::<Body>(b"{}").unwrap_err();
        assert_eq!(e.status, StatusCode::UNPROCESSABLE_ENTITY);
    }

    #[test]
    fn grid_point_errors_keep_their_field() {
        let e: ApiError = aucpower::Error::AtGridPoint {
            n: 10,
            source: Box::new(aucpower::Error::Domain {
                name: "alpha",
                value: 2.0,
                constraint: "x",
            }),
        }
        .into();
        assert_eq!(e.fields[0].field, "alpha");
    }
}
