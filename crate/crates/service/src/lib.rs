//! HTTP annotation service for the active-learning loop.
//!
//! Every mutation is appended to a per-session JSONL event log before the
//! response is sent; on start-up the service replays each log to rebuild its
//! sessions. Mutations on one session are serialized through a writer lock,
//! while status reads only take a short read lock and never wait for a
//! retrain in progress.

pub mod error;
pub mod session;

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::Html;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use readlevel::corpusio::{read_corpus, write_feature_matrix, save_model, CorpusRecord, ReadMode};

pub use error::ApiError;
pub use session::{
    AgreementResponse, BatchItem, Environment, Event, HistoryRow, LabelSubmission, Session, SessionConfig, Status,
    SubmitAck,
};

const EVENTS_FILE: &str = "events.jsonl";

struct SessionHandle {
    writer: tokio::sync::Mutex<EventLog>,
    state: RwLock<Session>,
}

struct EventLog {
    dir: Option<PathBuf>,
}

impl EventLog {
    fn append(&self, event: &Event) -> Result<(), ApiError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let line = serde_json::to_string(event).map_err(|e| ApiError::internal(e.to_string()))?;
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(EVENTS_FILE))
            .map_err(|e| ApiError::internal(format!("event log: {e}")))?;
        writeln!(file, "{line}")
            .and_then(|_| file.sync_data())
            .map_err(|e| ApiError::internal(format!("event log: {e}")))
    }

    fn snapshot(&self, session: &Session, step: usize) -> Result<(), ApiError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let snaps = dir.join("snapshots");
        fs::create_dir_all(&snaps).map_err(|e| ApiError::internal(format!("snapshot: {e}")))?;
        write_feature_matrix(&session.labeled, snaps.join(format!("step-{step}.csv")))
            .map_err(ApiError::from_core_internal)?;
        if let Some(model) = &session.model {
            save_model(model, snaps.join(format!("step-{step}.model.json"))).map_err(ApiError::from_core_internal)?;
        }
        Ok(())
    }
}

/// Shared service state: the environment and all live sessions.
pub struct AppState {
    env: Arc<Environment>,
    data_dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<SessionHandle>>>,
}

impl AppState {
    /// Creates the state, replaying every session found under `data_dir`.
    pub fn open(env: Environment, data_dir: Option<PathBuf>) -> Result<Arc<AppState>, ApiError> {
        let mut sessions = HashMap::new();
        if let Some(dir) = &data_dir {
            fs::create_dir_all(dir).map_err(|e| ApiError::internal(format!("data dir: {e}")))?;
            let mut entries: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| ApiError::internal(format!("data dir: {e}")))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.join(EVENTS_FILE).is_file())
                .collect();
            entries.sort();
            for path in entries {
                let events = read_events(&path.join(EVENTS_FILE))?;
                let session = Session::replay(&events, &env)?;
                tracing::info!(session = %session.id, events = events.len(), "replayed session");
                sessions.insert(
                    session.id.clone(),
                    Arc::new(SessionHandle {
                        writer: tokio::sync::Mutex::new(EventLog { dir: Some(path) }),
                        state: RwLock::new(session),
                    }),
                );
            }
        }
        Ok(Arc::new(AppState {
            env: Arc::new(env),
            data_dir,
            sessions: RwLock::new(sessions),
        }))
    }

    fn handle(&self, id: &str) -> Result<Arc<SessionHandle>, ApiError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session {id:?}")))
    }

    /// Read-only copy of a session, for inspection and tests.
    pub fn session_snapshot(&self, id: &str) -> Result<Session, ApiError> {
        Ok(self.handle(id)?.state.read().expect("session lock").clone())
    }
}

/// Reads a session's event log.
pub fn read_events(path: &Path) -> Result<Vec<Event>, ApiError> {
    let file = fs::File::open(path).map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line.map_err(|e| ApiError::internal(e.to_string()))?;
            serde_json::from_str(&line)
                .map_err(|e| ApiError::internal(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/batch", get(next_batch))
        .route("/sessions/{id}/labels", post(submit_labels))
        .route("/sessions/{id}/retrain", post(retrain))
        .route("/sessions/{id}/status", get(status))
        .route("/sessions/{id}/agreement", get(agreement))
        .with_state(state);
    let app = Router::new().nest("/api/v1", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(placeholder_index)),
    }
}

async fn placeholder_index() -> Html<&'static str> {
    Html(
        "<!doctype html><title>readlevel</title><p>Annotation service is running. \
         Build the workbench UI and start the server with <code>--static DIR</code>, \
         or use the JSON API under <code>/api/v1</code>.</p>",
    )
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    #[serde(default)]
    pub session_id: Option<String>,
    #[serde(default)]
    pub corpus: Option<Vec<CorpusRecord>>,
    /// Server-side path of a JSONL corpus, as an alternative to `corpus`.
    #[serde(default)]
    pub corpus_path: Option<String>,
    #[serde(default)]
    pub config: SessionConfig,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub labeled_size: usize,
    pub pool_size: usize,
    pub dropped: usize,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let records = match (req.corpus, &req.corpus_path) {
        (Some(records), None) => records,
        (None, Some(path)) => read_corpus(path, ReadMode::Strict)
            .map_err(ApiError::from_core_unprocessable)?
            .records,
        _ => {
            return Err(ApiError::unprocessable(
                "invalid_request",
                "give exactly one of corpus or corpus_path",
            ))
        }
    };
    for r in &records {
        r.validate()
            .map_err(|m| ApiError::unprocessable("malformed", format!("record {:?}: {m}", r.id)))?;
    }
    let id = match req.session_id {
        Some(id) => {
            if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(ApiError::unprocessable("invalid_session_id", "use letters, digits, - and _"));
            }
            id
        }
        None => {
            let sessions = state.sessions.read().expect("sessions lock");
            (1..).map(|n| format!("s{n}")).find(|c| !sessions.contains_key(c)).unwrap()
        }
    };
    if state.sessions.read().expect("sessions lock").contains_key(&id) {
        return Err(ApiError::conflict("session_exists", format!("session {id:?} already exists")));
    }
    let env = state.env.clone();
    let config = req.config;
    let (session, records) = {
        let id = id.clone();
        tokio::task::spawn_blocking(move || {
            let s = Session::create(id, &records, config, &env);
            s.map(|s| (s, records))
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??
    };

    let log = EventLog {
        dir: state.data_dir.as_ref().map(|d| d.join(&id)),
    };
    if let Some(dir) = &log.dir {
        fs::create_dir_all(dir).map_err(|e| ApiError::internal(format!("session dir: {e}")))?;
        let _ = fs::remove_file(dir.join(EVENTS_FILE));
    }
    log.append(&Event::Created {
        session_id: id.clone(),
        records,
        config: session.config.clone(),
    })?;
    let created = Created {
        session_id: id.clone(),
        labeled_size: session.labeled.len(),
        pool_size: session.pool.len(),
        dropped: session.dropped.len(),
    };
    let mut sessions = state.sessions.write().expect("sessions lock");
    if sessions.contains_key(&id) {
        return Err(ApiError::conflict("session_exists", format!("session {id:?} already exists")));
    }
    sessions.insert(
        id,
        Arc::new(SessionHandle {
            writer: tokio::sync::Mutex::new(log),
            state: RwLock::new(session),
        }),
    );
    Ok((StatusCode::CREATED, Json(created)))
}

#[derive(Debug, Deserialize)]
pub struct BatchQuery {
    pub k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BatchResponse {
    pub session_id: String,
    pub cold_start: bool,
    pub strategy: readlevel::learnloop::SelectionStrategy,
    pub items: Vec<BatchItem>,
}

async fn next_batch(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<BatchQuery>,
) -> Result<Json<BatchResponse>, ApiError> {
    let handle = state.handle(&id)?;
    let log = handle.writer.lock().await;
    let (batch, items) = {
        let mut session = handle.state.write().expect("session lock");
        let (batch, fresh) = session.next_batch(q.k)?;
        if fresh {
            log.append(&Event::BatchServed { batch: batch.clone() })?;
        }
        let items = session.batch_items(&batch);
        (batch, items)
    };
    Ok(Json(BatchResponse {
        session_id: id,
        cold_start: batch.cold_start,
        strategy: batch.strategy,
        items,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LabelsRequest {
    pub submissions: Vec<LabelSubmission>,
}

async fn submit_labels(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<LabelsRequest>,
) -> Result<Json<SubmitAck>, ApiError> {
    let handle = state.handle(&id)?;
    let log = handle.writer.lock().await;
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let submissions: Vec<LabelSubmission> = req
        .submissions
        .into_iter()
        .map(|s| LabelSubmission {
            timestamp: Some(s.timestamp.unwrap_or(now)),
            ..s
        })
        .collect();
    let ack = handle.state.write().expect("session lock").submit(&submissions)?;
    log.append(&Event::Labels { submissions })?;
    Ok(Json(ack))
}

async fn retrain(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<HistoryRow>, ApiError> {
    let handle = state.handle(&id)?;
    let log = handle.writer.lock().await;
    let (labeled, config, step) = {
        let s = handle.state.read().expect("session lock");
        (s.labeled.clone(), s.config.clone(), s.history.len() + 1)
    };
    // heavy work happens without holding the session lock
    let (model, row) = tokio::task::spawn_blocking(move || Session::fit(&labeled, &config, step))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    {
        let mut s = handle.state.write().expect("session lock");
        s.install_model(model, row.clone());
        log.snapshot(&s, step)?;
    }
    log.append(&Event::Retrained { row: row.clone() })?;
    Ok(Json(row))
}

async fn status(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<Status>, ApiError> {
    let handle = state.handle(&id)?;
    let status = handle.state.read().expect("session lock").status();
    Ok(Json(status))
}

async fn agreement(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<AgreementResponse>, ApiError> {
    let handle = state.handle(&id)?;
    let report = handle.state.read().expect("session lock").agreement()?;
    Ok(Json(report))
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}
