use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::{json, Value};
use synopsviz_core::facets::FacetError;
use synopsviz_core::hierarchy::HierarchyError;
use synopsviz_core::schema::SchemaError;
use synopsviz_core::IngestError;

/// Error body: `{code, message, detail?}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn unknown_dataset(id: &str) -> Self {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "UnknownDataset",
            format!("no dataset with id {id:?}"),
        )
    }

    pub fn unknown_token(token: &str) -> Self {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "UnknownToken",
            format!("no hierarchy with token {token:?}"),
        )
    }

    pub fn empty_dataset() -> Self {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "EmptyDataset",
            "dataset contains no valid triples",
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        let message = e.to_string();
        match e {
            IngestError::UnreadableSource(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "UnreadableSource", message)
            }
            IngestError::TurtleSyntax { line, column, .. } => {
                ApiError::new(StatusCode::BAD_REQUEST, "TurtleSyntaxError", message)
                    .with_detail(json!({ "line": line, "column": column }))
            }
            IngestError::TooManyTriples { limit } => {
                ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "TooManyTriples", message)
                    .with_detail(json!({ "limit": limit }))
            }
        }
    }
}

impl From<FacetError> for ApiError {
    fn from(e: FacetError) -> Self {
        let message = e.to_string();
        match e {
            FacetError::UnknownProperty(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "UnknownProperty", message)
            }
            FacetError::UnknownClass(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "UnknownClass", message)
            }
        }
    }
}

impl From<SchemaError> for ApiError {
    fn from(e: SchemaError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "UnknownClass", e.to_string())
    }
}

impl From<HierarchyError> for ApiError {
    fn from(e: HierarchyError) -> Self {
        let message = e.to_string();
        let (status, code) = match e {
            HierarchyError::EmptyPointSet => (StatusCode::UNPROCESSABLE_ENTITY, "EmptyPointSet"),
            HierarchyError::ConfigOutOfBounds(_) => (StatusCode::BAD_REQUEST, "ConfigOutOfBounds"),
            HierarchyError::NonFiniteValue => (StatusCode::UNPROCESSABLE_ENTITY, "NonFiniteValue"),
            HierarchyError::UnknownNode(_) => (StatusCode::NOT_FOUND, "UnknownNode"),
            HierarchyError::NotALeaf(_) => (StatusCode::CONFLICT, "NotALeaf"),
        };
        ApiError::new(status, code, message)
    }
}
