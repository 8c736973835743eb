//! HTTP routes. Handlers are thin adapters over the core crate; every read
//! endpoint is a pure function of the loaded snapshot and its query.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use axum::extract::{FromRequest, FromRequestParts, Path, Request, State};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use newslens_core::aggregate::{ScatterPoint, SegmentationPoint, SentimentCategory, TopicStats};
use newslens_core::hive::{layout, HiveLayout, HiveSpec};
use newslens_core::review::{articles_for, highlighted_article, narration, ArticleQuery, Narration};
use newslens_core::session::{ParagraphRef, Round, Session, SessionSummary, Stage};
use newslens_core::store::SessionStore;
use newslens_core::{EntityId, OutletId, SentimentLabel, Workbench};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex as SessionLock;

use crate::error::ApiError;

pub struct AppState {
    workbench: OnceLock<Arc<Workbench>>,
    sessions: Mutex<HashMap<String, Arc<SessionLock<Session>>>>,
    store: SessionStore,
}

impl AppState {
    /// State with no snapshot yet; data endpoints answer 503 until
    /// [`AppState::install`] is called.
    pub fn loading(store: SessionStore) -> Arc<Self> {
        Arc::new(AppState {
            workbench: OnceLock::new(),
            sessions: Mutex::new(HashMap::new()),
            store,
        })
    }

    pub fn ready(wb: Workbench, store: SessionStore) -> Arc<Self> {
        let state = Self::loading(store);
        state.install(wb);
        state
    }

    pub fn install(&self, wb: Workbench) {
        let _ = self.workbench.set(Arc::new(wb));
    }

    pub fn is_ready(&self) -> bool {
        self.workbench.get().is_some()
    }

    fn wb(&self) -> Result<Arc<Workbench>, ApiError> {
        self.workbench.get().cloned().ok_or_else(ApiError::not_ready)
    }

    fn session(&self, id: &str) -> Result<Arc<SessionLock<Session>>, ApiError> {
        let mut sessions = self.sessions.lock().expect("session map poisoned");
        if let Some(s) = sessions.get(id) {
            return Ok(s.clone());
        }
        let loaded = Arc::new(SessionLock::new(self.store.load(id)?));
        sessions.insert(id.to_string(), loaded.clone());
        Ok(loaded)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/outlets", get(outlets))
        .route("/topics", get(topics))
        .route("/topics/{id}/narration", get(topic_narration))
        .route("/scatter", get(scatter))
        .route("/hive/data", get(hive_data))
        .route("/articles", get(articles))
        .route("/articles/{id}", get(article))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/settings", post(session_settings))
        .route("/sessions/{id}/summary", get(summary))
        .route("/sessions/{id}/rounds", post(new_round))
        .route("/sessions/{id}/rounds/current", get(current_round))
        .route("/sessions/{id}/rounds/current/choose", post(choose))
        .route("/sessions/{id}/rounds/current/assign", post(assign))
        .route("/sessions/{id}/rounds/current/set-center", post(set_center))
        .route("/sessions/{id}/rounds/current/finalize", post(finalize))
        .route("/sessions/{id}/rounds/current/reveal", post(reveal))
        .route("/sessions/{id}/rounds/current/select-conflict", post(select_conflict))
        .route("/sessions/{id}/rounds/current/notes", post(add_note))
        .route("/sessions/{id}/rounds/current/finish", post(finish))
        .with_state(state)
}

/// Query-string extractor whose failures use the JSON error body.
pub struct Params<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Params<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| Params(q.0))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// JSON body extractor whose failures use the JSON error body.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state)
            .await
            .map(|j| Body(j.0))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

fn seg_from(sx: Option<f64>, sy: Option<f64>, default: SegmentationPoint) -> Result<SegmentationPoint, ApiError> {
    SegmentationPoint::new(sx.unwrap_or(default.sx), sy.unwrap_or(default.sy))
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_segmentation", e.to_string()))
}

fn topic_id(wb: &Workbench, key: &str) -> Result<EntityId, ApiError> {
    wb.corpus()
        .resolve_entity(key)
        .ok_or_else(|| ApiError::unknown_topic(key))
}

fn outlet_id(wb: &Workbench, key: &str) -> Result<OutletId, ApiError> {
    wb.resolve_outlet(key)
        .cloned()
        .ok_or_else(|| ApiError::unknown_outlet(key))
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    ready: bool,
}

async fn health(State(state): Shared) -> Json<Health> {
    Json(Health {
        status: "ok",
        ready: state.is_ready(),
    })
}

async fn outlets(State(state): Shared) -> ApiResult<Vec<OutletId>> {
    Ok(Json(state.wb()?.outlets().iter().cloned().collect()))
}

#[derive(Deserialize)]
struct ThresholdQuery {
    threshold: Option<u32>,
}

#[derive(Serialize)]
struct TopicRow {
    display_name: String,
    #[serde(flatten)]
    stats: TopicStats,
}

async fn topics(State(state): Shared, Params(q): Params<ThresholdQuery>) -> ApiResult<Vec<TopicRow>> {
    let wb = state.wb()?;
    let threshold = q.threshold.unwrap_or(0);
    Ok(Json(
        wb.topic_stats()
            .iter()
            .filter(|s| s.total_articles >= threshold)
            .map(|s| TopicRow {
                display_name: wb.corpus().display_name(&s.entity).unwrap_or_default().to_string(),
                stats: s.clone(),
            })
            .collect(),
    ))
}

#[derive(Deserialize)]
struct SegQuery {
    threshold: Option<u32>,
    sx: Option<f64>,
    sy: Option<f64>,
}

#[derive(Serialize)]
struct ScatterRow {
    display_name: String,
    #[serde(flatten)]
    point: ScatterPoint,
}

#[derive(Serialize)]
struct ScatterResponse {
    threshold: u32,
    seg: SegmentationPoint,
    color_buckets: u32,
    points: Vec<ScatterRow>,
}

async fn scatter(State(state): Shared, Params(q): Params<SegQuery>) -> ApiResult<ScatterResponse> {
    let wb = state.wb()?;
    let seg = seg_from(q.sx, q.sy, SegmentationPoint::default())?;
    let threshold = q.threshold.unwrap_or(0);
    let points = wb
        .scatter(threshold, seg)
        .into_iter()
        .map(|point| ScatterRow {
            display_name: wb
                .corpus()
                .display_name(&point.stats.entity)
                .unwrap_or_default()
                .to_string(),
            point,
        })
        .collect();
    Ok(Json(ScatterResponse {
        threshold,
        seg,
        color_buckets: wb.color_buckets,
        points,
    }))
}

async fn topic_narration(
    State(state): Shared,
    Path(id): Path<String>,
    Params(q): Params<SegQuery>,
) -> ApiResult<Narration> {
    let wb = state.wb()?;
    let seg = seg_from(q.sx, q.sy, SegmentationPoint::default())?;
    Ok(Json(narration(&wb, &topic_id(&wb, &id)?, seg)?))
}

#[derive(Deserialize)]
struct HiveQuery {
    center: String,
    outlet: String,
    sx: Option<f64>,
    sy: Option<f64>,
    /// When given, refuses to answer for that session's unrevealed round.
    session: Option<String>,
}

#[derive(Serialize)]
struct HiveResponse {
    hive: HiveSpec,
    layout: HiveLayout,
}

async fn hive_data(State(state): Shared, Params(q): Params<HiveQuery>) -> ApiResult<HiveResponse> {
    let wb = state.wb()?;
    let center = topic_id(&wb, &q.center)?;
    let outlet = outlet_id(&wb, &q.outlet)?;
    if let Some(id) = &q.session {
        let session = state.session(id)?;
        let session = session.lock().await;
        let pending = session.current().is_some_and(|r| {
            r.data_hive.is_none()
                && r.user_hive
                    .as_ref()
                    .is_some_and(|h| h.center == center && h.outlet == outlet)
        });
        if pending {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "not_revealed",
                "the data hive of the active round is only available after reveal",
            ));
        }
    }
    let seg = seg_from(q.sx, q.sy, SegmentationPoint::default())?;
    let hive = wb.data_hive(&center, &outlet, seg)?;
    Ok(Json(HiveResponse {
        layout: layout(&hive),
        hive,
    }))
}

#[derive(Deserialize)]
struct ArticlesQuery {
    topic: String,
    co_topic: Option<String>,
    outlet: Option<String>,
    polarity: Option<SentimentLabel>,
}

async fn articles(
    State(state): Shared,
    Params(q): Params<ArticlesQuery>,
) -> ApiResult<newslens_core::review::ArticleGroups> {
    let wb = state.wb()?;
    let mut query = ArticleQuery::topic(topic_id(&wb, &q.topic)?);
    if let Some(co) = &q.co_topic {
        query = query.with_co_topic(topic_id(&wb, co)?);
    }
    if let Some(o) = &q.outlet {
        query = query.in_outlet(outlet_id(&wb, o)?);
    }
    query.polarity = q.polarity;
    Ok(Json(articles_for(&wb, &query)?))
}

#[derive(Deserialize)]
struct HighlightQuery {
    /// Comma-separated topic ids or names.
    highlight: Option<String>,
}

async fn article(
    State(state): Shared,
    Path(id): Path<String>,
    Params(q): Params<HighlightQuery>,
) -> ApiResult<newslens_core::review::HighlightedArticle> {
    let wb = state.wb()?;
    let topics = q
        .highlight
        .iter()
        .flat_map(|h| h.split(','))
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| topic_id(&wb, t))
        .collect::<Result<BTreeSet<_>, _>>()?;
    Ok(Json(highlighted_article(&wb, &id, &topics)?))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SettingsBody {
    sx: Option<f64>,
    sy: Option<f64>,
    threshold: Option<u32>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    id: Option<String>,
    sx: Option<f64>,
    sy: Option<f64>,
    threshold: Option<u32>,
}

/// A round plus the hex layouts of whichever hives it has.
#[derive(Serialize)]
struct RoundView {
    number: usize,
    #[serde(flatten)]
    round: Round,
    user_layout: Option<HiveLayout>,
    data_layout: Option<HiveLayout>,
}

impl RoundView {
    fn of(number: usize, round: &Round) -> Self {
        RoundView {
            number,
            user_layout: round.user_hive.as_ref().map(layout),
            data_layout: round.data_hive.as_ref().map(layout),
            round: round.clone(),
        }
    }
}

#[derive(Serialize)]
struct SessionView {
    id: String,
    created_at: DateTime<Utc>,
    seg: SegmentationPoint,
    threshold: u32,
    rounds: usize,
    current: Option<RoundView>,
}

fn session_view(s: &Session) -> SessionView {
    SessionView {
        id: s.id.clone(),
        created_at: s.created_at,
        seg: s.seg,
        threshold: s.threshold,
        rounds: s.rounds.len(),
        current: s
            .rounds
            .last()
            .filter(|r| r.stage != Stage::Done)
            .map(|r| RoundView::of(s.rounds.len(), r)),
    }
}

async fn create_session(
    State(state): Shared,
    body: axum::body::Bytes,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let body: CreateBody = if body.iter().all(u8::is_ascii_whitespace) {
        CreateBody::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?
    };
    let id = body.id.unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
    let mut session = Session::new(id.clone());
    apply_settings(
        &mut session,
        SettingsBody {
            sx: body.sx,
            sy: body.sy,
            threshold: body.threshold,
        },
    )?;
    {
        let mut sessions = state.sessions.lock().expect("session map poisoned");
        let taken = sessions.contains_key(&id) || state.store.load(&id).is_ok();
        if taken {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "session_exists",
                format!("session {id} already exists"),
            ));
        }
        state.store.persist(&session)?;
        sessions.insert(id, Arc::new(SessionLock::new(session.clone())));
    }
    Ok((StatusCode::CREATED, Json(session_view(&session))))
}

fn apply_settings(session: &mut Session, body: SettingsBody) -> Result<(), ApiError> {
    if body.sx.is_some() || body.sy.is_some() {
        let seg = seg_from(body.sx, body.sy, session.seg)?;
        session.set_segmentation(seg.sx, seg.sy)?;
    }
    if let Some(t) = body.threshold {
        session.set_threshold(t);
    }
    Ok(())
}

/// Runs one mutation under the session's lock and persists the result.
async fn mutate<R>(
    state: &AppState,
    id: &str,
    f: impl FnOnce(&mut Session, &Workbench) -> Result<R, ApiError>,
) -> Result<(R, SessionView), ApiError> {
    let wb = state.wb()?;
    let lock = state.session(id)?;
    let mut session = lock.lock().await;
    let mut draft = session.clone();
    let out = f(&mut draft, &wb)?;
    state.store.persist(&draft)?;
    *session = draft;
    Ok((out, session_view(&session)))
}

async fn get_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<SessionView> {
    let lock = state.session(&id)?;
    let session = lock.lock().await;
    Ok(Json(session_view(&session)))
}

async fn session_settings(
    State(state): Shared,
    Path(id): Path<String>,
    Body(body): Body<SettingsBody>,
) -> ApiResult<SessionView> {
    let ((), view) = mutate(&state, &id, |s, _| apply_settings(s, body)).await?;
    Ok(Json(view))
}

async fn summary(State(state): Shared, Path(id): Path<String>) -> ApiResult<SessionSummary> {
    let lock = state.session(&id)?;
    let session = lock.lock().await;
    Ok(Json(session.summary()))
}

async fn current_round(State(state): Shared, Path(id): Path<String>) -> ApiResult<RoundView> {
    let lock = state.session(&id)?;
    let session = lock.lock().await;
    let round = session
        .current()
        .ok_or_else(|| ApiError::from(newslens_core::session::SessionError::NoActiveRound))?;
    Ok(Json(RoundView::of(session.rounds.len(), round)))
}

fn round_view(view: SessionView) -> Json<RoundView> {
    Json(view.current.expect("mutation left an active round"))
}

/// Opens a round. A round in article review is closed first ("try
/// another").
async fn new_round(State(state): Shared, Path(id): Path<String>) -> Result<(StatusCode, Json<RoundView>), ApiError> {
    let ((), view) = mutate(&state, &id, |s, _| {
        if s.current().is_some_and(|r| r.stage == Stage::ArticleReview) {
            s.try_another()?;
        } else {
            s.start_round()?;
        }
        Ok(())
    })
    .await?;
    Ok((StatusCode::CREATED, round_view(view)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChooseBody {
    topic: String,
    outlet: String,
}

async fn choose(State(state): Shared, Path(id): Path<String>, Body(body): Body<ChooseBody>) -> ApiResult<RoundView> {
    let ((), view) = mutate(&state, &id, |s, wb| {
        let topic = topic_id(wb, &body.topic)?;
        let outlet = outlet_id(wb, &body.outlet)?;
        s.choose_topic_outlet(wb, &topic, &outlet)?;
        Ok(())
    })
    .await?;
    Ok(round_view(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignBody {
    topic: String,
    region: SentimentCategory,
}

async fn assign(State(state): Shared, Path(id): Path<String>, Body(body): Body<AssignBody>) -> ApiResult<RoundView> {
    let ((), view) = mutate(&state, &id, |s, wb| {
        s.assign(&topic_id(wb, &body.topic)?, body.region)?;
        Ok(())
    })
    .await?;
    Ok(round_view(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CenterBody {
    category: SentimentCategory,
}

async fn set_center(
    State(state): Shared,
    Path(id): Path<String>,
    Body(body): Body<CenterBody>,
) -> ApiResult<RoundView> {
    let ((), view) = mutate(&state, &id, |s, _| Ok(s.set_center_sentiment(body.category)?)).await?;
    Ok(round_view(view))
}

async fn finalize(State(state): Shared, Path(id): Path<String>) -> ApiResult<RoundView> {
    let ((), view) = mutate(&state, &id, |s, _| Ok(s.finalize()?)).await?;
    Ok(round_view(view))
}

async fn reveal(State(state): Shared, Path(id): Path<String>) -> ApiResult<RoundView> {
    let ((), view) = mutate(&state, &id, |s, wb| {
        s.reveal(wb)?;
        Ok(())
    })
    .await?;
    Ok(round_view(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectBody {
    topic: String,
}

async fn select_conflict(
    State(state): Shared,
    Path(id): Path<String>,
    Body(body): Body<SelectBody>,
) -> ApiResult<RoundView> {
    let ((), view) = mutate(&state, &id, |s, wb| {
        s.select_conflict(&topic_id(wb, &body.topic)?)?;
        Ok(())
    })
    .await?;
    Ok(round_view(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoteBody {
    text: String,
    reference: Option<ParagraphRef>,
}

async fn add_note(
    State(state): Shared,
    Path(id): Path<String>,
    Body(body): Body<NoteBody>,
) -> Result<(StatusCode, Json<RoundView>), ApiError> {
    let ((), view) = mutate(&state, &id, |s, wb| {
        s.add_note(wb, body.text, body.reference)?;
        Ok(())
    })
    .await?;
    Ok((StatusCode::CREATED, round_view(view)))
}

async fn finish(State(state): Shared, Path(id): Path<String>) -> ApiResult<SessionView> {
    let ((), view) = mutate(&state, &id, |s, _| Ok(s.finish_round()?)).await?;
    Ok(Json(view))
}
