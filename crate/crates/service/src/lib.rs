//! JSON-over-HTTP review API for workbench projects.
//!
//! Reads go through read-only store handles and never touch the journal.
//! Mutations open the project as its single writer, so a CLI holding the
//! lock turns them into `423 Locked`. Stage runs execute on the blocking
//! pool and are polled through `GET /api/runs/{run_id}`.

mod error;
mod routes;

pub use error::ApiError;

use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Router;
use mathpvs_core::canonical::to_canonical_line;
use mathpvs_core::store::{ProjectStore, Stage, StageRun, StoreError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub roots: Vec<PathBuf>,
    /// Origins allowed by CORS; empty allows any.
    pub cors_origins: Vec<String>,
    /// Built review UI served at `/`.
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no project roots given")]
    NoProjects,
    #[error("two roots share the project id `{0}`")]
    DuplicateProject(String),
    #[error("{0}: {1}")]
    Store(PathBuf, StoreError),
    #[error("invalid CORS origin `{0}`")]
    BadOrigin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Running,
    Done,
    Failed,
}

/// A stage run requested over HTTP.
#[derive(Debug, Clone, Serialize)]
pub struct Job {
    pub run_id: String,
    pub project_id: String,
    pub stage: Stage,
    pub state: JobState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<StageRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

struct Inner {
    projects: BTreeMap<String, PathBuf>,
    jobs: Mutex<BTreeMap<String, Job>>,
    next_job: AtomicU64,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(roots: &[PathBuf]) -> Result<AppState, ServiceError> {
        if roots.is_empty() {
            return Err(ServiceError::NoProjects);
        }
        let mut projects = BTreeMap::new();
        for root in roots {
            let store = ProjectStore::open(root).map_err(|e| ServiceError::Store(root.clone(), e))?;
            let id = store.project().map_err(|e| ServiceError::Store(root.clone(), e))?.project_id;
            if projects.insert(id.clone(), root.clone()).is_some() {
                return Err(ServiceError::DuplicateProject(id));
            }
        }
        Ok(AppState {
            inner: Arc::new(Inner { projects, jobs: Mutex::new(BTreeMap::new()), next_job: AtomicU64::new(1) }),
        })
    }

    pub(crate) fn projects(&self) -> &BTreeMap<String, PathBuf> {
        &self.inner.projects
    }

    pub(crate) fn root(&self, id: &str) -> Result<&PathBuf, ApiError> {
        self.inner.projects.get(id).ok_or_else(|| ApiError::not_found(format!("project `{id}`")))
    }

    pub(crate) fn reader(&self, id: &str) -> Result<ProjectStore, ApiError> {
        Ok(ProjectStore::open(self.root(id)?)?)
    }

    pub(crate) fn writer(&self, id: &str) -> Result<ProjectStore, ApiError> {
        Ok(ProjectStore::open_writer(self.root(id)?)?)
    }

    /// Register a running job, refusing a second one for the same project.
    pub(crate) fn start_job(&self, project_id: &str, stage: Stage) -> Result<Job, ApiError> {
        let mut jobs = self.inner.jobs.lock().expect("job table poisoned");
        if jobs.values().any(|j| j.project_id == project_id && j.state == JobState::Running) {
            return Err(ApiError::new(StatusCode::CONFLICT, "busy", "a stage is already running for this project"));
        }
        let n = self.inner.next_job.fetch_add(1, Ordering::SeqCst);
        let job = Job {
            run_id: format!("job-{n}"),
            project_id: project_id.to_owned(),
            stage,
            state: JobState::Running,
            result: None,
            error: None,
        };
        jobs.insert(job.run_id.clone(), job.clone());
        Ok(job)
    }

    pub(crate) fn finish_job(&self, run_id: &str, outcome: Result<StageRun, ApiError>) {
        let mut jobs = self.inner.jobs.lock().expect("job table poisoned");
        if let Some(job) = jobs.get_mut(run_id) {
            match outcome {
                Ok(run) => {
                    job.state = JobState::Done;
                    job.result = Some(run);
                }
                Err(e) => {
                    job.state = JobState::Failed;
                    job.error = Some(e);
                }
            }
        }
    }

    pub(crate) fn job(&self, run_id: &str) -> Option<Job> {
        self.inner.jobs.lock().expect("job table poisoned").get(run_id).cloned()
    }
}

/// Canonical JSON response.
pub(crate) fn json<T: Serialize + ?Sized>(status: StatusCode, body: &T) -> Response {
    let mut resp = (status, to_canonical_line(body)).into_response();
    resp.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    resp
}

pub fn router(state: AppState, config: &ServiceConfig) -> Result<Router, ServiceError> {
    let cors = if config.cors_origins.is_empty() {
        CorsLayer::new().allow_origin(Any)
    } else {
        let origins = config
            .cors_origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| ServiceError::BadOrigin(o.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        CorsLayer::new().allow_origin(AllowOrigin::list(origins))
    }
    .allow_methods(Any)
    .allow_headers(Any);
    let mut app = routes::api().with_state(state).layer(cors);
    if let Some(dir) = &config.static_dir {
        app = app.fallback_service(tower_http::services::ServeDir::new(dir));
    }
    Ok(app)
}

/// Serve until the process is stopped.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> Result<(), ServiceError> {
    let state = AppState::new(&config.roots)?;
    let app = router(state, &config)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("review service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
