//! HTTP front end of [`SessionService`].
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | `{selector: random\|id\|category\|free-draw, id?, category?, subject?}` |
//! | POST | `/sessions/{id}/advance` | `{guess?, stroke?, category?}` |
//! | GET | `/sessions/{id}` | |
//! | POST | `/sessions/{id}/score` | `{criteria?: "EM\|SUB\|SYN", wup_threshold?}` |
//! | POST | `/sessions/{id}/ratings` | `{judge_id, guesser, rating, scale_reversed?}` |
//! | GET | `/export?category=&part=corpus\|ratings\|json` | |
//! | GET | `/analytics/histogram`, `/analytics/first-guess` `?source=corpus\|sessions` | |
//! | GET | `/healthz` | |
//!
//! Failures answer `{code, message}`: 404 for unknown sessions, sketches or
//! empty exports, 409 for state-machine violations, 400 for bad input.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use super::service::{AdvanceRequest, AnalyticsSource, ExportFilter, SessionService, SketchSelector};
use crate::error::Error;
use crate::lexnet::{CriteriaSet, DEFAULT_WUP_THRESHOLD};
use crate::stats::{GuesserType, Rating};

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

pub struct ApiError(StatusCode, ErrorBody);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            Error::Protocol(_) => (StatusCode::CONFLICT, "protocol_violation"),
            Error::Io { .. } | Error::Undefined(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
            _ => (StatusCode::BAD_REQUEST, "bad_request"),
        };
        ApiError(
            status,
            ErrorBody {
                code,
                message: e.to_string(),
            },
        )
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError(
            StatusCode::BAD_REQUEST,
            ErrorBody {
                code: "bad_request",
                message: r.body_text(),
            },
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type Body<T> = Result<Json<T>, JsonRejection>;
type OptionalBody<T> = Result<Option<Json<T>>, JsonRejection>;

/// An absent body means all defaults.
fn or_default<T: Default>(body: OptionalBody<T>) -> Result<T, ApiError> {
    Ok(body?.map(|Json(b)| b).unwrap_or_default())
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = Arc<SessionService>;

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SelectorKind {
    #[default]
    Random,
    Id,
    Category,
    FreeDraw,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    #[serde(default)]
    selector: SelectorKind,
    id: Option<String>,
    category: Option<String>,
    subject: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreBody {
    criteria: Option<String>,
    wup_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingBody {
    judge_id: String,
    guesser: GuesserType,
    rating: Rating,
    #[serde(default)]
    scale_reversed: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ExportPart {
    #[default]
    Corpus,
    Ratings,
    Json,
}

#[derive(Debug, Default, Deserialize)]
struct ExportQuery {
    category: Option<String>,
    #[serde(default)]
    part: ExportPart,
}

#[derive(Debug, Default, Deserialize)]
struct AnalyticsQuery {
    #[serde(default)]
    source: AnalyticsSource,
}

fn missing(field: &str) -> ApiError {
    Error::invalid(format!("missing field {field:?}")).into()
}

async fn create(State(svc): State<Shared>, body: OptionalBody<CreateBody>) -> Result<Response, ApiError> {
    let b = or_default(body)?;
    let selector = match b.selector {
        SelectorKind::Random => SketchSelector::Random,
        SelectorKind::Id => SketchSelector::Id(b.id.ok_or_else(|| missing("id"))?),
        SelectorKind::Category => SketchSelector::Category(b.category.ok_or_else(|| missing("category"))?),
        SelectorKind::FreeDraw => SketchSelector::FreeDraw,
    };
    let created = svc.create(selector, b.subject)?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn advance(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    body: OptionalBody<AdvanceRequest>,
) -> ApiResult<super::service::AdvanceOutcome> {
    let req = or_default(body)?;
    Ok(Json(svc.advance(&id, req)?))
}

async fn view(State(svc): State<Shared>, Path(id): Path<String>) -> ApiResult<super::service::SessionView> {
    Ok(Json(svc.view(&id)?))
}

async fn score(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    body: OptionalBody<ScoreBody>,
) -> ApiResult<super::service::ScoreReport> {
    let b = or_default(body)?;
    let base = match &b.criteria {
        Some(c) => c.parse::<CriteriaSet>()?,
        None => CriteriaSet::default(),
    };
    let criteria = CriteriaSet::with_threshold(&base.criteria(), b.wup_threshold.unwrap_or(DEFAULT_WUP_THRESHOLD))?;
    Ok(Json(svc.score(&id, &criteria)?))
}

async fn rate(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    body: Body<RatingBody>,
) -> ApiResult<super::service::RatingAck> {
    let Json(b) = body?;
    Ok(Json(svc.rate(&id, &b.judge_id, b.guesser, b.rating, b.scale_reversed)?))
}

async fn export(State(svc): State<Shared>, Query(q): Query<ExportQuery>) -> Result<Response, ApiError> {
    let out = svc.export(&ExportFilter { category: q.category })?;
    let text = |s: String| ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], s).into_response();
    Ok(match q.part {
        ExportPart::Corpus => text(out.corpus),
        ExportPart::Ratings => text(out.ratings),
        ExportPart::Json => Json(out).into_response(),
    })
}

async fn analytics(
    State(svc): State<Shared>,
    Path(kind): Path<String>,
    Query(q): Query<AnalyticsQuery>,
) -> Result<Response, ApiError> {
    match kind.as_str() {
        "histogram" => Ok(Json(svc.histogram(q.source)?).into_response()),
        "first-guess" => Ok(Json(svc.first_guess(q.source)?).into_response()),
        other => Err(Error::NotFound(format!("analytics {other:?}")).into()),
    }
}

async fn healthz(State(svc): State<Shared>) -> Json<super::service::Health> {
    Json(svc.health())
}

async fn fallback() -> ApiError {
    ApiError(
        StatusCode::NOT_FOUND,
        ErrorBody {
            code: "not_found",
            message: "no such route".into(),
        },
    )
}

pub fn router(svc: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(view))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/score", post(score))
        .route("/sessions/{id}/ratings", post(rate))
        .route("/export", get(export))
        .route("/analytics/{kind}", get(analytics))
        .route("/healthz", get(healthz))
        .fallback(fallback)
        .with_state(svc)
}

/// Serves until Ctrl-C.
pub async fn serve(svc: Shared, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(svc))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
