use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;

use gptlods_core::index::IndexError;
use gptlods_core::pipeline::PipelineError;
use gptlods_core::validation::ValidationError;

/// JSON problem document: `{"error": {"code": ..., "message": ...}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_input", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

impl From<IndexError> for ApiError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::NotFound(_) => Self::not_found(e.to_string()),
            IndexError::InvalidPageSize(_) => Self::bad_request(e.to_string()),
        }
    }
}

impl From<ValidationError> for ApiError {
    fn from(e: ValidationError) -> Self {
        match e {
            ValidationError::Index(inner) => inner.into(),
            ValidationError::SamePair(_) => Self::bad_request(e.to_string()),
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        use gptlods_core::llm::ProviderError;
        match e {
            PipelineError::Provider(ProviderError::EmptyQuestion) => Self::bad_request(e.to_string()),
            PipelineError::Provider(_) => Self::new(StatusCode::BAD_GATEWAY, "provider_error", e.to_string()),
            PipelineError::RecognizersUnavailable(_) => {
                Self::new(StatusCode::SERVICE_UNAVAILABLE, "recognizers_unavailable", e.to_string())
            }
            PipelineError::Annotation(_) => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
            }
        }
    }
}
