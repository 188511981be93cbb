use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use mathpvs_core::pipeline::PipelineError;
use mathpvs_core::store::StoreError;
use serde::Serialize;

/// Error body returned by every failing endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError { status: status.as_u16(), code, message: message.into(), detail: None }
    }

    pub fn not_found(what: impl std::fmt::Display) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what}"))
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> ApiError {
        let (status, code) = match &e {
            StoreError::ProjectNotFound(_) | StoreError::UnknownVersion(_) | StoreError::UnknownArtifact { .. } => {
                (StatusCode::NOT_FOUND, "not_found")
            }
            StoreError::ImmutableOverwrite { .. } => (StatusCode::CONFLICT, "immutable_overwrite"),
            StoreError::Locked => (StatusCode::LOCKED, "locked"),
            StoreError::InvariantViolation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invariant_violation"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "store_error"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> ApiError {
        let (status, code) = match &e {
            PipelineError::Store(inner) => return inner.clone().into(),
            PipelineError::GateViolation { .. } => (StatusCode::CONFLICT, "gate_violation"),
            PipelineError::UpstreamIncomplete { .. } => (StatusCode::CONFLICT, "upstream_incomplete"),
            PipelineError::NoDocuments => (StatusCode::CONFLICT, "no_documents"),
            PipelineError::Config(_) => (StatusCode::INTERNAL_SERVER_ERROR, "config"),
            PipelineError::StageFailed { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "stage_failed"),
            PipelineError::Ingest(_) => (StatusCode::UNPROCESSABLE_ENTITY, "ingest"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        crate::json(status, &self)
    }
}
