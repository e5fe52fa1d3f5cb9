//! JSON HTTP API over a [`WorkspaceStore`].

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::formal::{evaluate_ledger, AggregateWeights, ContestationLedger};
use crate::questionnaire::{score_assessment, AnswerSheet, RubricCatalog, ScoredAssessment};
use crate::report::{radar_data, render_report, DiscrepancyNote, ReportBundle, ReportFormat};
use crate::scoring::WeightConfig;
use crate::store::WorkspaceStore;
use crate::taxonomy::{ClassificationInput, Level, Reliance, Taxonomy, Thresholds};
use crate::whatif::{compare_systems, rank_interventions, BaselineRef, ScenarioDocument};

pub struct AppState {
    pub store: WorkspaceStore,
    pub weights: WeightConfig,
    pub taxonomy: Taxonomy,
    pub thresholds: Thresholds,
}

impl AppState {
    pub fn new(store: WorkspaceStore) -> Self {
        AppState {
            store,
            weights: WeightConfig::default_config().clone(),
            taxonomy: Taxonomy::builtin().clone(),
            thresholds: Thresholds::default(),
        }
    }
}

type Shared = Arc<AppState>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            Error::SchemaVersion { .. } => (StatusCode::CONFLICT, "schema_version"),
            Error::UnsupportedFormat(_) => (StatusCode::BAD_REQUEST, "unsupported_format"),
            Error::Io(_) | Error::InjectedFault(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
            Error::Json(_) => (StatusCode::BAD_REQUEST, "malformed_json"),
            _ => (StatusCode::BAD_REQUEST, "validation"),
        };
        ApiError {
            status,
            body: ErrorBody {
                code: code.into(),
                message: e.to_string(),
                field: e.field(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    router_with_static(state, None)
}

/// Like [`router`], serving files under `static_dir` for unmatched GETs.
pub fn router_with_static(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/rubrics", get(rubrics))
        .route("/weights", get(weights))
        .route("/assessments", post(create_assessment).get(list_assessments))
        .route("/assessments/:id", get(get_assessment))
        .route("/assessments/:id/score", post(score_stored))
        .route("/assessments/:id/radar", get(radar))
        .route("/scenarios/evaluate", post(evaluate_scenario))
        .route("/scenarios/rank", post(rank_scenario))
        .route("/taxonomy", get(taxonomy))
        .route("/taxonomy/:reliance/:level", get(taxonomy_cell))
        .route("/ledgers/evaluate", post(evaluate_ledger_route))
        .route("/reports/:id", get(report))
        .with_state(Arc::new(state));
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(addr: SocketAddr, state: AppState, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router_with_static(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn healthz() -> Json<Value> {
    Json(json!({"status": "ok", "version": env!("CARGO_PKG_VERSION")}))
}

async fn rubrics() -> Json<&'static RubricCatalog> {
    Json(RubricCatalog::builtin())
}

async fn weights(State(s): State<Shared>) -> Json<WeightConfig> {
    Json(s.weights.clone())
}

fn parse_sheet(body: &str) -> ApiResult<AnswerSheet> {
    let sheet = AnswerSheet::from_json(body)?;
    if let Some(e) = sheet.validate().into_iter().next() {
        return Err(e.into());
    }
    Ok(sheet)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StoredAssessment {
    pub id: String,
    pub assessment: ScoredAssessment,
}

async fn create_assessment(State(s): State<Shared>, body: String) -> ApiResult<Json<StoredAssessment>> {
    let sheet = parse_sheet(&body)?;
    let assessment = score_assessment(&sheet, &s.weights)?;
    let st = s.clone();
    let id = tokio::task::spawn_blocking(move || st.store.put_sheet(&sheet))
        .await
        .map_err(|e| Error::Io(std::io::Error::other(e)))??;
    Ok(Json(StoredAssessment { id, assessment }))
}

async fn list_assessments(State(s): State<Shared>) -> ApiResult<Json<Vec<String>>> {
    Ok(Json(s.store.list(crate::store::DocKind::Assessment)?))
}

async fn get_assessment(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<AnswerSheet>> {
    Ok(Json(s.store.get_sheet(&id)?))
}

async fn score_stored(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<ScoredAssessment>> {
    let sheet = s.store.get_sheet(&id)?;
    Ok(Json(score_assessment(&sheet, &s.weights)?))
}

async fn radar(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let scored = score_assessment(&s.store.get_sheet(&id)?, &s.weights)?;
    let rows = compare_systems(&[scored])?;
    Ok(Json(json!(radar_data(&rows))))
}

/// Resolves a scenario's baseline. Paths are not accepted over HTTP.
fn scenario_baseline(s: &AppState, d: &ScenarioDocument) -> ApiResult<AnswerSheet> {
    let sheet = match d.baseline_ref()? {
        BaselineRef::Sheet { sheet } => (**sheet).clone(),
        BaselineRef::Id { id } => s.store.get_sheet(id).map_err(|e| match e {
            Error::NotFound(id) => Error::invalid("baseline", format!("no stored assessment `{id}`")),
            other => other,
        })?,
        BaselineRef::Path { .. } => {
            return Err(Error::invalid("baseline", "use {\"id\": ...} or {\"sheet\": ...} over HTTP").into())
        }
    };
    if let Some(e) = sheet.validate().into_iter().next() {
        return Err(e.into());
    }
    Ok(sheet)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScenarioResponse {
    pub baseline: ScoredAssessment,
    pub result: crate::whatif::ScenarioResult,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<DiscrepancyNote>,
}

async fn evaluate_scenario(State(s): State<Shared>, body: String) -> ApiResult<Json<ScenarioResponse>> {
    let d = ScenarioDocument::from_json(&body)?;
    let sheet = scenario_baseline(&s, &d)?;
    let (baseline, result) = d.evaluate(&sheet, &s.weights)?;
    let notes = ReportBundle::new(baseline.clone())
        .with_scenario(result.clone(), d.published_total())
        .discrepancies()
        .into_iter()
        .filter(|n| n.subject != "baseline")
        .collect();
    Ok(Json(ScenarioResponse { baseline, result, notes }))
}

async fn rank_scenario(State(s): State<Shared>, body: String) -> ApiResult<Json<Value>> {
    let d = ScenarioDocument::from_json(&body)?;
    let sheet = scenario_baseline(&s, &d)?;
    let baseline = score_assessment(&sheet, &s.weights)?;
    let ranked = rank_interventions(&baseline, &d.modifications, &s.weights)?;
    Ok(Json(json!({"baseline_total": baseline.cas.total, "candidates": ranked})))
}

async fn taxonomy(State(s): State<Shared>) -> Json<Taxonomy> {
    Json(s.taxonomy.clone())
}

async fn taxonomy_cell(
    State(s): State<Shared>,
    Path((reliance, level)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let reliance: Reliance = reliance.parse()?;
    let level: Level = level.parse()?;
    let cell = s.taxonomy.cell(reliance, level);
    let requirements = s.taxonomy.resolve_requirements(reliance, level);
    Ok(Json(json!({
        "reliance": reliance,
        "level": level,
        "flags": cell.flags,
        "examples": cell.examples,
        "introduced": cell.criteria,
        "requirements": requirements,
    })))
}

#[derive(Debug, Deserialize)]
struct WeightsQuery {
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
}

async fn evaluate_ledger_route(Query(q): Query<WeightsQuery>, body: String) -> ApiResult<Json<Value>> {
    let weights = match (q.alpha, q.beta, q.gamma) {
        (None, None, None) => AggregateWeights::default(),
        (Some(a), Some(b), Some(g)) => AggregateWeights::new(a, b, g)?,
        _ => return Err(Error::invalid("weights", "give all of alpha, beta and gamma or none").into()),
    };
    let ledger = ContestationLedger::from_json(&body)?;
    Ok(Json(json!(evaluate_ledger(&ledger, weights)?)))
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    format: Option<String>,
}

async fn report(State(s): State<Shared>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult<Response> {
    let format: ReportFormat = q.format.as_deref().unwrap_or("markdown").parse()?;
    let sheet = s.store.get_sheet(&id)?;
    let scored = score_assessment(&sheet, &s.weights)?;
    let mut bundle = ReportBundle::new(scored.clone());
    if let Some(reliance) = sheet.metadata.reliance {
        let input = ClassificationInput {
            reliance,
            cas_total: Some(scored.cas.total),
            level_override: None,
        };
        bundle = bundle.with_taxonomy(s.taxonomy.classify(&input, s.thresholds)?, &s.taxonomy);
    }
    let text = render_report(&bundle, format)?;
    let mime = match format {
        ReportFormat::Markdown => "text/markdown; charset=utf-8",
        ReportFormat::Json => "application/json",
        ReportFormat::Csv => "text/csv; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, mime)], text).into_response())
}
