//! JSON over HTTP. Routes and bodies are listed in `docs/API.md`.

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Service, ServiceError};
use crate::analytics::UserId;
use crate::engine::{EngineError, Surface};
use crate::placement::Condition;
use crate::quizgen::{QuizError, QuizId};

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/users", post(enroll))
        .route("/users/{user}/next-item", get(next_item))
        .route("/users/{user}/engage", post(engage))
        .route("/users/{user}/answer", post(answer))
        .route("/users/{user}/link-item", get(link_item))
        .route("/users/{user}/link-click", post(link_click))
        .route("/users/{user}/feed-render", post(feed_render))
        .route("/users/{user}/plan", get(plan))
        .route("/users/{user}/metrics", get(metrics))
        .route("/match", get(match_url))
        .route("/layout", get(layout))
        .with_state(service)
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::Engine(inner) => match inner {
                EngineError::UnknownUser(_) | EngineError::UnknownQuiz(_) => StatusCode::NOT_FOUND,
                EngineError::UserExists(_) | EngineError::WrongCondition { .. } | EngineError::QuizClosed(_) => {
                    StatusCode::CONFLICT
                }
                EngineError::Quiz(QuizError::IndexOutOfRange { .. }) => StatusCode::BAD_REQUEST,
                _ => StatusCode::INTERNAL_SERVER_ERROR,
            },
            ServiceError::Filter(_) | ServiceError::Placement(_) | ServiceError::BadRequest(_) => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, axum::Json(ErrorBody { error: self.message })).into_response()
    }
}

type ApiResult<T> = Result<axum::Json<T>, ApiError>;

/// `Json` whose rejections use the API's error body.
struct Json<T>(T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Json<T> {
    type Rejection = ApiError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        axum::Json::<T>::from_request(req, state)
            .await
            .map(|axum::Json(v)| Json(v))
            .map_err(|e: JsonRejection| ApiError::bad_request(e.body_text()))
    }
}

/// `Query` whose rejections use the API's error body.
struct Params<T>(T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Params<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut axum::http::request::Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| Params(v))
            .map_err(|e: QueryRejection| ApiError::bad_request(e.body_text()))
    }
}

fn user_id(raw: String) -> Result<UserId, ApiError> {
    UserId::new(raw).map_err(|e| ApiError::bad_request(e.to_string()))
}

fn ok<T>(value: T) -> ApiResult<T> {
    Ok(axum::Json(value))
}

async fn health(State(svc): State<Arc<Service>>) -> ApiResult<super::Health> {
    ok(svc.health())
}

#[derive(Debug, Deserialize)]
struct EnrollBody {
    user_id: String,
    condition: String,
}

#[derive(Debug, Serialize)]
struct Enrolled {
    user_id: UserId,
    condition: Condition,
}

async fn enroll(State(svc): State<Arc<Service>>, Json(body): Json<EnrollBody>) -> Result<(StatusCode, axum::Json<Enrolled>), ApiError> {
    let user = user_id(body.user_id)?;
    let condition: Condition = body.condition.parse().map_err(ApiError::bad_request)?;
    svc.enroll(user.clone(), condition)?;
    Ok((StatusCode::CREATED, axum::Json(Enrolled { user_id: user, condition })))
}

#[derive(Debug, Default, Deserialize)]
struct NextItemQuery {
    surface: Option<String>,
}

async fn next_item(
    State(svc): State<Arc<Service>>,
    Path(user): Path<String>,
    Params(q): Params<NextItemQuery>,
) -> ApiResult<crate::engine::Item> {
    let surface = match q.surface.as_deref() {
        None | Some("feed") => Surface::Feed,
        Some("site") => Surface::QuizSite,
        Some(other) => return Err(ApiError::bad_request(format!("unknown surface {other:?}"))),
    };
    ok(svc.next_item(&user_id(user)?, surface)?)
}

#[derive(Debug, Deserialize)]
struct QuizRef {
    quiz_id: String,
}

#[derive(Debug, Serialize)]
struct Ack {
    ok: bool,
}

async fn engage(State(svc): State<Arc<Service>>, Path(user): Path<String>, Json(body): Json<QuizRef>) -> ApiResult<Ack> {
    svc.engage(&user_id(user)?, &QuizId(body.quiz_id))?;
    ok(Ack { ok: true })
}

#[derive(Debug, Deserialize)]
struct AnswerBody {
    quiz_id: String,
    chosen_index: usize,
}

async fn answer(
    State(svc): State<Arc<Service>>,
    Path(user): Path<String>,
    Json(body): Json<AnswerBody>,
) -> ApiResult<crate::quizgen::AnswerResult> {
    ok(svc.answer(&user_id(user)?, &QuizId(body.quiz_id), body.chosen_index)?)
}

#[derive(Debug, Serialize)]
struct LinkItem {
    url: String,
}

async fn link_item(State(svc): State<Arc<Service>>, Path(user): Path<String>) -> ApiResult<LinkItem> {
    ok(LinkItem {
        url: svc.link_item(&user_id(user)?)?,
    })
}

async fn link_click(State(svc): State<Arc<Service>>, Path(user): Path<String>) -> ApiResult<Ack> {
    svc.link_click(&user_id(user)?)?;
    ok(Ack { ok: true })
}

#[derive(Debug, Deserialize)]
struct FeedRenderBody {
    items: usize,
}

async fn feed_render(
    State(svc): State<Arc<Service>>,
    Path(user): Path<String>,
    Json(body): Json<FeedRenderBody>,
) -> ApiResult<Ack> {
    svc.feed_render(&user_id(user)?, body.items)?;
    ok(Ack { ok: true })
}

#[derive(Debug, Deserialize)]
struct PlanQuery {
    feed_length: usize,
}

async fn plan(
    State(svc): State<Arc<Service>>,
    Path(user): Path<String>,
    Params(q): Params<PlanQuery>,
) -> ApiResult<crate::placement::FeedPlan> {
    ok(svc.plan(&user_id(user)?, q.feed_length)?)
}

async fn metrics(State(svc): State<Arc<Service>>, Path(user): Path<String>) -> ApiResult<crate::analytics::Metrics> {
    ok(svc.metrics(&user_id(user)?)?)
}

#[derive(Debug, Deserialize)]
struct MatchQuery {
    url: String,
    page: Option<String>,
    third_party: Option<bool>,
}

async fn match_url(State(svc): State<Arc<Service>>, Params(q): Params<MatchQuery>) -> ApiResult<crate::filter::MatchDecision> {
    ok(svc.match_url(&q.url, q.page.as_deref(), q.third_party)?)
}

#[derive(Debug, Deserialize)]
struct LayoutQuery {
    w: u32,
    h: u32,
}

#[derive(Debug, Serialize)]
struct Layout {
    fill: Option<crate::placement::SlotFill>,
}

async fn layout(State(svc): State<Arc<Service>>, Params(q): Params<LayoutQuery>) -> ApiResult<Layout> {
    ok(Layout {
        fill: svc.layout(q.w, q.h)?,
    })
}
