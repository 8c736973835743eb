use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use newslens_core::hive::HiveError;
use newslens_core::review::ReviewError;
use newslens_core::session::SessionError;
use newslens_core::store::StoreError;
use serde_json::json;

/// Error response body: `{"error": <code>, "message": <text>}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_ready() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "not_ready",
            "the corpus snapshot is still loading",
        )
    }

    pub fn unknown_topic(key: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_topic", format!("unknown topic {key}"))
    }

    pub fn unknown_outlet(key: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_outlet", format!("unknown outlet {key}"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code, "message": self.message });
        (self.status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::UnknownTopic(_) | SessionError::UnknownOutlet(_) => StatusCode::NOT_FOUND,
            SessionError::BelowThreshold { .. }
            | SessionError::NoCandidates(_)
            | SessionError::NotSelectable(_)
            | SessionError::DanglingReference { .. }
            | SessionError::Segmentation(_)
            | SessionError::Hive(HiveError::NotACandidate(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::CONFLICT,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        let code = match e {
            ReviewError::UnknownTopic(_) => "unknown_topic",
            ReviewError::UnknownOutlet(_) => "unknown_outlet",
            ReviewError::UnknownArticle(_) => "unknown_article",
        };
        ApiError::new(StatusCode::NOT_FOUND, code, e.to_string())
    }
}

impl From<HiveError> for ApiError {
    fn from(e: HiveError) -> Self {
        SessionError::Hive(e).into()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownSession(_) | StoreError::InvalidId(_) => {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_session", e.to_string())
            }
            other => ApiError::internal(other.to_string()),
        }
    }
}
