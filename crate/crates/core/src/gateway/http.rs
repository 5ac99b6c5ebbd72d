use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use rand::RngCore;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{decode_values, status_of, DataDir, RecordBody, DEFAULT_IDLE, DEFAULT_LIMIT, DEFAULT_PORT};
use crate::error::{Error, Result};
use crate::ingest::{self, ImportMapping};
use crate::reports::{self, Format};
use crate::store::{ObjectId, Store};
use crate::traversal::{Filter, FilterSpec, Session, Step};

/// Failure of one request: a domain error or a gateway-level problem.
#[derive(Debug)]
pub enum ApiError {
    Domain(Error),
    UnknownSession(String),
    BadRequest(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Domain(e)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match self {
            ApiError::Domain(e) => (status_of(&e), e.code().to_string(), e.to_string()),
            ApiError::UnknownSession(t) => (404, "UnknownSession".into(), format!("no live session `{t}`")),
            ApiError::BadRequest(m) => (400, "BadRequest".into(), m),
        };
        let status = StatusCode::from_u16(status).expect("valid status");
        (status, Json(ErrorBody { code, message })).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

struct SessionSlot {
    session: Arc<tokio::sync::Mutex<Session>>,
    last_used: Instant,
}

struct Inner {
    data_dir: Option<DataDir>,
    current: RwLock<Arc<Store>>,
    writer: tokio::sync::Mutex<()>,
    sessions: Mutex<HashMap<String, SessionSlot>>,
    idle: Duration,
}

/// Shared service state. Readers take the current snapshot; writers are
/// serialized, work on a copy, persist it and then swap it in.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// A service over `store`. With a data directory every accepted write is
    /// saved before it becomes visible.
    pub fn new(store: Store, data_dir: Option<DataDir>, idle: Duration) -> Self {
        AppState {
            inner: Arc::new(Inner {
                data_dir,
                current: RwLock::new(Arc::new(store)),
                writer: tokio::sync::Mutex::new(()),
                sessions: Mutex::new(HashMap::new()),
                idle,
            }),
        }
    }

    pub fn in_memory(store: Store) -> Self {
        AppState::new(store, None, DEFAULT_IDLE)
    }

    /// Loads the data directory; a snapshot failing its integrity check is refused.
    pub fn open(data_dir: DataDir, idle: Duration) -> Result<Self> {
        let store = data_dir.load_store()?;
        Ok(AppState::new(store, Some(data_dir), idle))
    }

    pub fn snapshot(&self) -> Arc<Store> {
        Arc::clone(&self.inner.current.read().expect("store lock"))
    }

    /// Applies `f` to a copy of the store and installs the copy only if `f`
    /// succeeded and the copy was persisted.
    pub async fn write<T>(&self, f: impl FnOnce(&mut Store) -> Result<T>) -> Result<T> {
        let _guard = self.inner.writer.lock().await;
        let mut next = Store::clone(&self.snapshot());
        let out = f(&mut next)?;
        if let Some(dir) = &self.inner.data_dir {
            dir.save_store(&next)?;
        }
        *self.inner.current.write().expect("store lock") = Arc::new(next);
        Ok(out)
    }

    pub fn create_session(&self) -> String {
        let mut bytes = [0u8; 16];
        rand::rng().fill_bytes(&mut bytes);
        let token = hex::encode(bytes);
        let mut sessions = self.inner.sessions.lock().expect("session lock");
        self.purge(&mut sessions);
        sessions.insert(
            token.clone(),
            SessionSlot {
                session: Arc::new(tokio::sync::Mutex::new(Session::new())),
                last_used: Instant::now(),
            },
        );
        token
    }

    pub fn live_sessions(&self) -> usize {
        let mut sessions = self.inner.sessions.lock().expect("session lock");
        self.purge(&mut sessions);
        sessions.len()
    }

    fn purge(&self, sessions: &mut HashMap<String, SessionSlot>) {
        let idle = self.inner.idle;
        sessions.retain(|_, slot| slot.last_used.elapsed() <= idle);
    }

    fn session(&self, token: &str) -> ApiResult<Arc<tokio::sync::Mutex<Session>>> {
        let mut sessions = self.inner.sessions.lock().expect("session lock");
        self.purge(&mut sessions);
        let slot = sessions
            .get_mut(token)
            .ok_or_else(|| ApiError::UnknownSession(token.to_string()))?;
        slot.last_used = Instant::now();
        Ok(Arc::clone(&slot.session))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/classes", get(list_classes))
        .route("/classes/{class}/objects", get(class_objects))
        .route("/objects", post(create_object))
        .route("/objects/{id}", get(get_object).patch(update_object).delete(delete_object))
        .route("/objects/{id}/view", get(view_object))
        .route("/sessions", post(create_session))
        .route("/sessions/{token}", get(get_session))
        .route("/sessions/{token}/filter", put(set_filter))
        .route("/sessions/{token}/filter/{class}", delete(clear_filter))
        .route("/sessions/{token}/anchor", put(set_anchor))
        .route("/sessions/{token}/anchor/{class}", delete(clear_anchor))
        .route("/sessions/{token}/view", get(session_view))
        .route("/sessions/{token}/focus", post(session_focus))
        .route("/sessions/{token}/follow", post(session_follow))
        .route("/import/inspect", post(import_inspect))
        .route("/import/commit", post(import_commit))
        .route("/reports/object/{id}", get(object_report))
        .route("/reports/list", get(list_report))
        .route("/export", get(export))
        .with_state(state)
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("invalid JSON body: {e}")))
}

fn parse_id(raw: &str) -> ApiResult<ObjectId> {
    raw.parse::<u64>()
        .ok()
        .and_then(ObjectId::new)
        .ok_or_else(|| ApiError::BadRequest(format!("`{raw}` is not an object id")))
}

fn document(format: Format, body: String) -> Response {
    ([(header::CONTENT_TYPE, format.content_type())], body).into_response()
}

#[derive(Debug, Default, Deserialize)]
struct ListQuery {
    session: Option<String>,
    limit: Option<usize>,
}

/// Runs `f` against the caller's session, or against a fresh one when the
/// request carries no token. The session is first pruned of stale ids.
async fn with_session<T>(
    state: &AppState,
    token: Option<&str>,
    f: impl FnOnce(&mut Session, &Store) -> Result<T>,
) -> ApiResult<T> {
    let store = state.snapshot();
    match token {
        Some(t) => {
            let session = state.session(t)?;
            let mut session = session.lock().await;
            session.retain_live(&store);
            Ok(f(&mut session, &store)?)
        }
        None => Ok(f(&mut Session::new(), &store)?),
    }
}

async fn list_classes(State(state): State<AppState>, Query(q): Query<ListQuery>) -> ApiResult<Response> {
    let classes = with_session(&state, q.session.as_deref(), |s, store| Ok(s.list_classes(store))).await?;
    Ok(Json(classes).into_response())
}

async fn class_objects(
    State(state): State<AppState>,
    Path(class): Path<String>,
    Query(q): Query<ListQuery>,
) -> ApiResult<Response> {
    let mut objects = with_session(&state, q.session.as_deref(), |s, store| s.select_class(store, &class)).await?;
    objects.truncate(q.limit.unwrap_or(DEFAULT_LIMIT));
    Ok(Json(objects).into_response())
}

#[derive(Debug, Deserialize)]
struct CreateBody {
    class: String,
    #[serde(default)]
    values: serde_json::Map<String, serde_json::Value>,
}

async fn create_object(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body: CreateBody = parse_body(&body)?;
    let record = state
        .write(|store| {
            let values = decode_values(store.vocabulary(), &body.class, &body.values)?;
            let id = store.insert(&body.class, values.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))))?;
            Ok(RecordBody::new(store, store.require(id)?))
        })
        .await?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

async fn get_object(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    let store = state.snapshot();
    Ok(Json(RecordBody::new(&store, store.require(id)?)).into_response())
}

#[derive(Debug, Deserialize)]
struct UpdateBody {
    values: serde_json::Map<String, serde_json::Value>,
}

async fn update_object(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    let body: UpdateBody = parse_body(&body)?;
    let record = state
        .write(|store| {
            let class = store.require(id)?.class.clone();
            let changes = decode_values(store.vocabulary(), &class, &body.values)?;
            store.update(id, changes)?;
            Ok(RecordBody::new(store, store.require(id)?))
        })
        .await?;
    Ok(Json(record).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct DeleteQuery {
    #[serde(default)]
    detach: bool,
}

async fn delete_object(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<DeleteQuery>,
) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    state.write(|store| store.delete(id, q.detach)).await?;
    Ok(Json(serde_json::json!({ "deleted": id })).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct ViewQuery {
    session: Option<String>,
}

async fn view_object(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ViewQuery>,
) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    let view = with_session(&state, q.session.as_deref(), |s, store| s.focus(store, id)).await?;
    Ok(Json(view).into_response())
}

async fn create_session(State(state): State<AppState>) -> ApiResult<Response> {
    let token = state.create_session();
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "token": token }))).into_response())
}

async fn get_session(State(state): State<AppState>, Path(token): Path<String>) -> ApiResult<Response> {
    let session = with_session(&state, Some(&token), |s, _| Ok(s.clone())).await?;
    Ok(Json(session).into_response())
}

async fn set_filter(State(state): State<AppState>, Path(token): Path<String>, body: Bytes) -> ApiResult<Response> {
    let spec: FilterSpec = parse_body(&body)?;
    let session = with_session(&state, Some(&token), |s, store| {
        let filter = Filter::from_spec(store.vocabulary(), spec)?;
        s.set_filter(store.vocabulary(), filter)?;
        Ok(s.clone())
    })
    .await?;
    Ok(Json(session).into_response())
}

async fn clear_filter(
    State(state): State<AppState>,
    Path((token, class)): Path<(String, String)>,
) -> ApiResult<Response> {
    let session = with_session(&state, Some(&token), |s, store| {
        s.clear_filter(store.vocabulary(), &class)?;
        Ok(s.clone())
    })
    .await?;
    Ok(Json(session).into_response())
}

#[derive(Debug, Deserialize)]
struct AnchorBody {
    class: String,
    id: ObjectId,
}

async fn set_anchor(State(state): State<AppState>, Path(token): Path<String>, body: Bytes) -> ApiResult<Response> {
    let body: AnchorBody = parse_body(&body)?;
    let session = with_session(&state, Some(&token), |s, store| {
        s.set_anchor(store, &body.class, body.id)?;
        Ok(s.clone())
    })
    .await?;
    Ok(Json(session).into_response())
}

async fn clear_anchor(
    State(state): State<AppState>,
    Path((token, class)): Path<(String, String)>,
) -> ApiResult<Response> {
    let session = with_session(&state, Some(&token), |s, store| {
        s.clear_anchor(store.vocabulary(), &class)?;
        Ok(s.clone())
    })
    .await?;
    Ok(Json(session).into_response())
}

async fn session_view(State(state): State<AppState>, Path(token): Path<String>) -> ApiResult<Response> {
    let view = with_session(&state, Some(&token), |s, store| s.view(store)).await?;
    Ok(Json(view).into_response())
}

#[derive(Debug, Deserialize)]
struct FocusBody {
    id: ObjectId,
}

async fn session_focus(State(state): State<AppState>, Path(token): Path<String>, body: Bytes) -> ApiResult<Response> {
    let body: FocusBody = parse_body(&body)?;
    let view = with_session(&state, Some(&token), |s, store| s.focus(store, body.id)).await?;
    Ok(Json(view).into_response())
}

/// `{"from": 4, "link": "opera"}` or `{"from": 4, "member": 9}`.
#[derive(Debug, Deserialize)]
struct FollowBody {
    from: ObjectId,
    link: Option<String>,
    member: Option<ObjectId>,
}

async fn session_follow(State(state): State<AppState>, Path(token): Path<String>, body: Bytes) -> ApiResult<Response> {
    let body: FollowBody = parse_body(&body)?;
    let step = match (body.link, body.member) {
        (Some(link), None) => Step::Link(link),
        (None, Some(member)) => Step::Member(member),
        _ => return Err(ApiError::BadRequest("give exactly one of `link` or `member`".into())),
    };
    let view = with_session(&state, Some(&token), |s, store| s.follow(store, body.from, &step)).await?;
    Ok(Json(view).into_response())
}

async fn import_inspect(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let source = std::str::from_utf8(&body).map_err(|_| ApiError::BadRequest("source is not UTF-8".into()))?;
    let inspection = ingest::inspect_in(&state.snapshot(), source)?;
    Ok(Json(inspection).into_response())
}

#[derive(Debug, Deserialize)]
struct CommitBody {
    mapping: ImportMapping,
    source: String,
}

async fn import_commit(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body: CommitBody = parse_body(&body)?;
    let report = state
        .write(|store| ingest::import(store, &body.mapping, &body.source))
        .await?;
    Ok(Json(report).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct ReportQuery {
    format: Option<String>,
    class: Option<String>,
    /// Comma-separated attribute names.
    columns: Option<String>,
    session: Option<String>,
}

fn format_of(q: &ReportQuery, default: Format) -> ApiResult<Format> {
    Ok(match &q.format {
        Some(f) => f.parse()?,
        None => default,
    })
}

async fn object_report(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ReportQuery>,
) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    let format = format_of(&q, Format::Txt)?;
    Ok(document(format, reports::object_report(&state.snapshot(), id, format)?))
}

async fn list_report(State(state): State<AppState>, Query(q): Query<ReportQuery>) -> ApiResult<Response> {
    let format = format_of(&q, Format::Txt)?;
    let class = q
        .class
        .clone()
        .ok_or_else(|| ApiError::BadRequest("`class` is required".into()))?;
    let columns: Vec<String> = q
        .columns
        .as_deref()
        .map(|c| c.split(',').map(str::trim).filter(|c| !c.is_empty()).map(String::from).collect())
        .unwrap_or_default();
    let doc = with_session(&state, q.session.as_deref(), |s, store| {
        reports::list_report(store, &class, s.filters.get(&class), &columns, format)
    })
    .await?;
    Ok(document(format, doc))
}

async fn export(State(state): State<AppState>, Query(q): Query<ReportQuery>) -> ApiResult<Response> {
    let format = format_of(&q, Format::Xml)?;
    Ok(document(format, reports::export_store(&state.snapshot(), format)?))
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub data_dir: PathBuf,
    pub host: String,
    pub port: u16,
    pub idle: Duration,
}

impl ServeConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServeConfig {
            data_dir: data_dir.into(),
            host: "127.0.0.1".into(),
            port: DEFAULT_PORT,
            idle: DEFAULT_IDLE,
        }
    }
}

/// Loads the data directory and serves until Ctrl-C. `ready` receives the
/// bound address once the listener is up.
pub async fn serve(config: ServeConfig, ready: impl FnOnce(SocketAddr)) -> Result<()> {
    let state = AppState::open(DataDir::new(&config.data_dir), config.idle)?;
    let listener = tokio::net::TcpListener::bind((config.host.as_str(), config.port)).await?;
    ready(listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
