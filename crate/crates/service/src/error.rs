use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use pibase_core::corpus::ResolveError;
use pibase_core::deduction::CandidateError;
use pibase_core::id::IdError;
use pibase_core::logic::QueryError;
use serde::Serialize;
use serde_json::{json, Value};

/// Error body: `{"error": {"code", "message", "location", "suggestions"}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub location: Option<Value>,
    pub suggestions: Vec<String>,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
    location: &'a Option<Value>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    suggestions: &'a [String],
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            location: None,
            suggestions: Vec::new(),
        }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn at(mut self, location: Value) -> Self {
        self.location = Some(location);
        self
    }

    pub fn invalid_id(parameter: &str, error: IdError) -> Self {
        Self::bad_request("invalid_id", error.to_string()).at(json!({ "parameter": parameter }))
    }

    pub fn body(&self) -> Value {
        json!({
            "error": Body {
                code: self.code,
                message: &self.message,
                location: &self.location,
                suggestions: &self.suggestions,
            }
        })
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let location = match &e {
            QueryError::Unresolved { term, offset, .. }
            | QueryError::Malformed { term, offset } => {
                json!({ "parameter": "q", "offset": offset, "term": term })
            }
            QueryError::EmptyTerm { offset } => json!({ "parameter": "q", "offset": offset }),
            QueryError::Duplicate { term, .. } => json!({ "parameter": "q", "term": term }),
            QueryError::Contradictory { property } => {
                json!({ "parameter": "q", "property": property })
            }
        };
        ApiError {
            suggestions: e.suggestions().to_vec(),
            ..Self::bad_request(e.code(), e.to_string()).at(location)
        }
    }
}

impl ApiError {
    pub fn unresolved(field: String, error: ResolveError) -> Self {
        let ResolveError::NotFound { suggestions, .. } = &error;
        ApiError {
            suggestions: suggestions.clone(),
            ..Self::bad_request("unresolved_name", error.to_string()).at(json!({ "field": field }))
        }
    }
}

impl From<CandidateError> for ApiError {
    fn from(e: CandidateError) -> Self {
        let code = match e {
            CandidateError::NoPremises => "no_premises",
            CandidateError::UnknownProperty(_) => "unknown_property",
            CandidateError::DuplicatePremise(_) => "duplicate_premise",
            CandidateError::ConclusionInPremises(_) => "conclusion_in_premises",
        };
        Self::bad_request(code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request("invalid_body", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad_request("invalid_parameters", e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        Self::bad_request("invalid_path", e.body_text())
    }
}
