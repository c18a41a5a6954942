//! HTTP routes. Entities are addressed by canonical integer id; every payload
//! carries the representative IRI. Offsets are Unicode code points.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use gptlods_core::index::{DatasetMentions, EntityFact};
use gptlods_core::llm::Provider;
use gptlods_core::pipeline::{Annotation, PipelineResult};
use gptlods_core::validation::{validate_entities, PairEvidence, MAX_VALIDATED_ENTITIES};
use gptlods_core::{CanonicalEntityId, Dataset, DatasetId, Engine, EntityCard, Iri};

use crate::error::ApiError;

pub const DEFAULT_PAGE_SIZE: usize = 50;

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub provider: Option<Arc<Provider>>,
    pub clock: Clock,
}

impl AppState {
    pub fn new(engine: Engine, provider: Option<Provider>) -> Self {
        Self { engine: Arc::new(engine), provider: provider.map(Arc::new), clock: Arc::new(Utc::now) }
    }

    /// Stamps every response with `at` instead of the wall clock.
    pub fn with_fixed_time(mut self, at: DateTime<Utc>) -> Self {
        self.clock = Arc::new(move || at);
        self
    }
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/ask", post(ask))
        .route("/api/annotate", post(annotate))
        .route("/api/factcheck", post(factcheck))
        .route("/api/datasets", get(datasets))
        .route("/api/entity/{id}", get(entity))
        .route("/api/entity/{id}/uris", get(entity_uris))
        .route("/api/entity/{id}/facts", get(entity_facts))
        .route("/api/entity/{id}/datasets", get(entity_datasets))
        .with_state(state);
    let api = api.route("/api/{*rest}", get(unknown_route).post(unknown_route));
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(unknown_route),
    }
}

async fn unknown_route() -> ApiError {
    ApiError::not_found("no such endpoint")
}

/// `Json` whose rejections are reported as problem documents.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(value)) => Ok(ApiJson(value)),
            Err(rejection) => Err(json_rejection(rejection)),
        }
    }
}

fn json_rejection(rejection: JsonRejection) -> ApiError {
    ApiError::bad_request(rejection.body_text())
}

fn parse_id(raw: &str) -> Result<CanonicalEntityId, ApiError> {
    raw.parse::<u32>()
        .map(CanonicalEntityId)
        .map_err(|_| ApiError::bad_request(format!("entity id must be a non-negative integer, got {raw:?}")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub entities: usize,
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health { status: "ok".into(), entities: state.engine.index().class_count() })
}

#[derive(Debug, Deserialize)]
pub struct AskRequest {
    pub question: String,
}

async fn ask(State(state): State<AppState>, ApiJson(body): ApiJson<AskRequest>) -> Result<Json<PipelineResult>, ApiError> {
    if body.question.trim().is_empty() {
        return Err(ApiError::bad_request("question must not be empty"));
    }
    let provider = state.provider.as_ref().ok_or_else(|| {
        ApiError::new(axum::http::StatusCode::BAD_GATEWAY, "provider_error", "no chat provider configured")
    })?;
    let result = state.engine.run_pipeline(&body.question, provider, (state.clock)()).await?;
    Ok(Json(result))
}

#[derive(Debug, Deserialize)]
pub struct AnnotateRequest {
    pub text: String,
}

async fn annotate(
    State(state): State<AppState>,
    ApiJson(body): ApiJson<AnnotateRequest>,
) -> Result<Json<Annotation>, ApiError> {
    let result = state.engine.annotate_text(&body.text, "none", (state.clock)()).await?;
    Ok(Json(result))
}

#[derive(Debug, Deserialize)]
pub struct FactcheckRequest {
    pub entity_ids: Vec<u32>,
}

async fn factcheck(
    State(state): State<AppState>,
    ApiJson(body): ApiJson<FactcheckRequest>,
) -> Result<Json<Vec<PairEvidence>>, ApiError> {
    let ids: BTreeSet<CanonicalEntityId> = body.entity_ids.into_iter().map(CanonicalEntityId).collect();
    if ids.len() > MAX_VALIDATED_ENTITIES {
        return Err(ApiError::bad_request(format!(
            "at most {MAX_VALIDATED_ENTITIES} distinct entities per request, got {}",
            ids.len()
        )));
    }
    let index = state.engine.index();
    if let Some(missing) = ids.iter().find(|id| !index.contains(**id)) {
        return Err(ApiError::not_found(format!("entity {missing} not found")));
    }
    let ids: Vec<_> = ids.into_iter().collect();
    Ok(Json(validate_entities(&ids, index)?))
}

async fn datasets(State(state): State<AppState>) -> Json<Vec<Dataset>> {
    Json(state.engine.index().registry().iter().cloned().collect())
}

async fn entity(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<EntityCard>, ApiError> {
    Ok(Json(state.engine.index().entity_card(parse_id(&id)?)?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EntityUris {
    pub id: CanonicalEntityId,
    pub representative: Iri,
    pub uris: Vec<Iri>,
}

async fn entity_uris(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<EntityUris>, ApiError> {
    let id = parse_id(&id)?;
    let index = state.engine.index();
    let uris = index.entity_uris(id)?;
    Ok(Json(EntityUris { id, representative: uris[0].clone(), uris }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EntityFactsPage {
    pub id: CanonicalEntityId,
    pub representative: Iri,
    pub page: usize,
    pub size: usize,
    pub total: usize,
    pub facts: Vec<EntityFact>,
}

async fn entity_facts(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Json<EntityFactsPage>, ApiError> {
    let id = parse_id(&id)?;
    let number = |name: &str, default: usize| -> Result<usize, ApiError> {
        match params.get(name).map(String::as_str) {
            None | Some("") => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| ApiError::bad_request(format!("{name} must be a non-negative integer"))),
        }
    };
    let (page, size) = (number("page", 0)?, number("size", DEFAULT_PAGE_SIZE)?);
    let index = state.engine.index();
    let facts = index.entity_facts(id, page, size)?;
    Ok(Json(EntityFactsPage {
        id,
        representative: index.representative(id)?.clone(),
        page,
        size,
        total: index.fact_count(id)?,
        facts,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub dataset: DatasetId,
    pub name: String,
    pub triples: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EntityDatasets {
    pub id: CanonicalEntityId,
    pub representative: Iri,
    pub datasets: Vec<DatasetEntry>,
}

async fn entity_datasets(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<EntityDatasets>, ApiError> {
    let id = parse_id(&id)?;
    let index = state.engine.index();
    let datasets = index
        .entity_datasets(id)?
        .into_iter()
        .map(|DatasetMentions { dataset, triples }| DatasetEntry {
            dataset,
            name: index.registry().get(dataset).map(|d| d.name.clone()).unwrap_or_default(),
            triples,
        })
        .collect();
    Ok(Json(EntityDatasets { id, representative: index.representative(id)?.clone(), datasets }))
}
