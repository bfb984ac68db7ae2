use std::collections::BTreeMap;
use std::path::{Component, Path as FsPath, PathBuf};
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pibase_core::corpus::{Entity, Namespace, SourceDocument, Theorem};
use pibase_core::deduction::{assess, Assessment, Implication, Provenance};
use pibase_core::id::{EntityId, EntityKind};
use pibase_core::logic::{parse_query, Literal};
use pibase_core::search::{search, SearchError, SearchResult};
use pibase_core::validate_documents;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ApiError;
use crate::AppState;

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn routes() -> Router<Arc<AppState>> {
    Router::new()
        .route("/", get(stats))
        .route("/properties", get(list_properties))
        .route("/properties/{id}", get(get_property))
        .route("/spaces", get(list_spaces))
        .route("/spaces/{id}", get(get_space))
        .route("/spaces/{id}/traits", get(space_traits))
        .route("/spaces/{id}/traits/{pid}/proof", get(trait_proof))
        .route("/theorems", get(list_theorems))
        .route("/theorems/check", post(check_theorem))
        .route("/theorems/{id}", get(get_theorem))
        .route("/search", get(run_search))
        .route("/validate", post(validate))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageParams {
    offset: Option<usize>,
    limit: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct Page<T> {
    total: usize,
    offset: usize,
    limit: Option<usize>,
    items: Vec<T>,
}

fn paginate<T: Clone>(items: impl Iterator<Item = T>, params: PageParams) -> Page<T> {
    let all: Vec<T> = items.collect();
    let total = all.len();
    let offset = params.offset.unwrap_or(0);
    let items = all
        .into_iter()
        .skip(offset)
        .take(params.limit.unwrap_or(usize::MAX))
        .collect();
    Page {
        total,
        offset,
        limit: params.limit,
        items,
    }
}

fn path_id(raw: &str, parameter: &str, kind: EntityKind) -> Result<EntityId, ApiError> {
    EntityId::parse_kind(raw, kind).map_err(|e| ApiError::invalid_id(parameter, e))
}

fn unknown(id: EntityId) -> ApiError {
    ApiError::not_found(format!("unknown {} {id}", id.kind().as_str()))
}

#[derive(Debug, Serialize)]
struct Stats {
    properties: usize,
    spaces: usize,
    theorems: usize,
    traits: usize,
}

async fn stats(State(state): Shared) -> Json<Stats> {
    let b = &state.db.bundle;
    Json(Stats {
        properties: b.property_count(),
        spaces: b.space_count(),
        theorems: b.theorem_count(),
        traits: b.assertion_count(),
    })
}

async fn list_properties(
    State(state): Shared,
    params: Result<Query<PageParams>, QueryRejection>,
) -> ApiResult<Page<Entity>> {
    let Query(params) = params?;
    Ok(Json(paginate(
        state.db.bundle.properties().cloned(),
        params,
    )))
}

async fn get_property(
    State(state): Shared,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult<Entity> {
    let id = path_id(&id?.0, "id", EntityKind::Property)?;
    state
        .db
        .bundle
        .property(id)
        .cloned()
        .map(Json)
        .ok_or_else(|| unknown(id))
}

async fn list_spaces(
    State(state): Shared,
    params: Result<Query<PageParams>, QueryRejection>,
) -> ApiResult<Page<Entity>> {
    let Query(params) = params?;
    Ok(Json(paginate(state.db.bundle.spaces().cloned(), params)))
}

async fn get_space(
    State(state): Shared,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult<Entity> {
    let id = path_id(&id?.0, "id", EntityKind::Space)?;
    state
        .db
        .bundle
        .space(id)
        .cloned()
        .map(Json)
        .ok_or_else(|| unknown(id))
}

async fn list_theorems(
    State(state): Shared,
    params: Result<Query<PageParams>, QueryRejection>,
) -> ApiResult<Page<Theorem>> {
    let Query(params) = params?;
    Ok(Json(paginate(state.db.bundle.theorems().cloned(), params)))
}

async fn get_theorem(
    State(state): Shared,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult<Theorem> {
    let id = path_id(&id?.0, "id", EntityKind::Theorem)?;
    state
        .db
        .bundle
        .theorem(id)
        .cloned()
        .map(Json)
        .ok_or_else(|| unknown(id))
}

#[derive(Debug, Serialize)]
pub struct TraitView {
    property: EntityId,
    value: bool,
    provenance: Provenance,
}

#[derive(Debug, Serialize)]
pub struct SpaceTraits {
    space: EntityId,
    traits: Vec<TraitView>,
    /// Properties of the bundle with no known value for this space.
    undetermined: Vec<EntityId>,
}

async fn space_traits(
    State(state): Shared,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult<SpaceTraits> {
    let space = path_id(&id?.0, "id", EntityKind::Space)?;
    let db = &state.db;
    let closure = db.closed.closure(space).ok_or_else(|| unknown(space))?;
    let traits = closure
        .assignment
        .literals()
        .map(|l| TraitView {
            property: l.property,
            value: l.value,
            provenance: Provenance::of(&db.bundle, space, closure, l.property)
                .expect("known value"),
        })
        .collect();
    let undetermined = db
        .bundle
        .properties()
        .map(|p| p.uid)
        .filter(|&p| closure.value(p).is_none())
        .collect();
    Ok(Json(SpaceTraits {
        space,
        traits,
        undetermined,
    }))
}

#[derive(Debug, Serialize)]
pub struct TraitProof {
    space: EntityId,
    property: EntityId,
    value: bool,
    provenance: Provenance,
}

async fn trait_proof(
    State(state): Shared,
    ids: Result<Path<(String, String)>, PathRejection>,
) -> ApiResult<TraitProof> {
    let Path((space, property)) = ids?;
    let space = path_id(&space, "id", EntityKind::Space)?;
    let property = path_id(&property, "pid", EntityKind::Property)?;
    let db = &state.db;
    let closure = db.closed.closure(space).ok_or_else(|| unknown(space))?;
    if db.bundle.property(property).is_none() {
        return Err(unknown(property));
    }
    let value = closure.value(property).ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "undetermined",
            format!("{property} is not determined for {space}"),
        )
    })?;
    let provenance = Provenance::of(&db.bundle, space, closure, property).expect("known value");
    Ok(Json(TraitProof {
        space,
        property,
        value,
        provenance,
    }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchParams {
    #[serde(default)]
    q: String,
}

async fn run_search(
    State(state): Shared,
    params: Result<Query<SearchParams>, QueryRejection>,
) -> ApiResult<SearchResult> {
    let Query(params) = params?;
    let db = &state.db;
    let query = parse_query(&params.q, &db.bundle)?;
    search(&query, &db.bundle, &db.closed, &db.engine)
        .map(Json)
        .map_err(|e| match e {
            SearchError::InconsistentBundle(_) => {
                ApiError::new(StatusCode::CONFLICT, "inconsistent_bundle", e.to_string())
            }
            SearchError::UnknownSpace(id) => unknown(id),
        })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRequest {
    #[serde(rename = "if")]
    premises: BTreeMap<String, bool>,
    then: BTreeMap<String, bool>,
}

const NOT_DERIVABLE_NOTE: &str =
    "the theorems neither prove nor refute this implication and no space refutes it; the listed spaces are undecided on its properties";

#[derive(Debug, Serialize)]
pub struct CheckResponse {
    candidate: Implication,
    #[serde(flatten)]
    verdict: Assessment,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

fn resolve_literals(
    state: &AppState,
    field: &str,
    map: BTreeMap<String, bool>,
) -> Result<Vec<Literal>, ApiError> {
    map.into_iter()
        .map(|(name, value)| {
            state
                .db
                .bundle
                .resolve_name(&name, Namespace::Property)
                .map(|p| Literal::new(p, value))
                .map_err(|e| ApiError::unresolved(format!("{field}.{name}"), e))
        })
        .collect()
}

async fn check_theorem(
    State(state): Shared,
    body: Result<Json<CheckRequest>, JsonRejection>,
) -> ApiResult<CheckResponse> {
    let Json(request) = body?;
    let premises = resolve_literals(&state, "if", request.premises)?;
    let conclusion = match resolve_literals(&state, "then", request.then)?.as_slice() {
        [one] => *one,
        other => {
            return Err(ApiError::bad_request(
                "conclusion_count",
                format!("`then` needs exactly one property, found {}", other.len()),
            )
            .at(json!({ "field": "then" })))
        }
    };
    let db = &state.db;
    let candidate = Implication::new(premises, conclusion);
    let verdict = assess(&candidate, &db.bundle, &db.engine, &db.closed)?;
    let note = matches!(verdict, Assessment::NotDerivable { .. }).then_some(NOT_DERIVABLE_NOTE);
    Ok(Json(CheckResponse {
        candidate,
        verdict,
        note,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmittedDocument {
    path: String,
    content: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateRequest {
    documents: Vec<SubmittedDocument>,
}

fn relative_path(raw: &str) -> Option<PathBuf> {
    let path = FsPath::new(raw);
    path.components()
        .all(|c| matches!(c, Component::Normal(_)))
        .then(|| path.to_path_buf())
        .filter(|p| p.components().next().is_some())
}

/// Checks the loaded bundle with the submitted documents added or
/// replacing files at the same paths. The loaded bundle is untouched.
async fn validate(
    State(state): Shared,
    body: Result<Json<ValidateRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(request) = body?;
    let mut merged: BTreeMap<PathBuf, String> = state
        .sources
        .iter()
        .map(|d| (d.path.clone(), d.text.clone()))
        .collect();
    for (i, doc) in request.documents.into_iter().enumerate() {
        let path = relative_path(&doc.path).ok_or_else(|| {
            ApiError::bad_request(
                "invalid_document_path",
                format!("`{}` is not a relative bundle path", doc.path),
            )
            .at(json!({ "field": format!("documents[{i}].path") }))
        })?;
        merged.insert(path, doc.content);
    }
    let docs = merged
        .into_iter()
        .map(|(p, t)| SourceDocument::new(p, t))
        .collect();
    let (report, _) = validate_documents(docs);
    let status = if !report.errors.is_empty() {
        StatusCode::BAD_REQUEST
    } else if !report.contradictions.is_empty() {
        StatusCode::CONFLICT
    } else {
        StatusCode::OK
    };
    let body = json!({
        "valid": report.is_clean(),
        "errors": report.errors,
        "contradictions": report.contradictions,
    });
    Ok((status, Json(body)).into_response())
}
