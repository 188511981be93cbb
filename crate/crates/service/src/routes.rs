use crate::{json, ApiError, AppState};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::Response;
use axum::routing::{get, post};
use axum::{Json, Router};
use mathpvs_core::ingest::StatementRecord;
use mathpvs_core::pipeline::{self, Pipeline, PipelineConfig};
use mathpvs_core::pvs::{analyze, Diagnostic, PreludeIndex};
use mathpvs_core::store::{Decision, ProjectStore, Stage, StageRun, StoredGraph, TheoryVersion};
use serde::{Deserialize, Serialize};

type ApiResult = Result<Response, ApiError>;

pub(crate) fn api() -> Router<AppState> {
    Router::new()
        .route("/api/projects", get(projects))
        .route("/api/projects/{id}/statements", get(statements))
        .route("/api/projects/{id}/graph", get(graph))
        .route("/api/projects/{id}/theories", get(theories))
        .route("/api/projects/{id}/theories/{version_id}", get(theory).put(edit_theory))
        .route("/api/projects/{id}/theories/{version_id}/lineage", get(lineage))
        .route("/api/projects/{id}/stages/{stage}", post(run_stage))
        .route("/api/projects/{id}/verdicts", post(verdict))
        .route("/api/projects/{id}/diff", get(diff))
        .route("/api/projects/{id}/report", get(report))
        .route("/api/runs/{run_id}", get(run_status))
}

fn ok<T: Serialize + ?Sized>(body: &T) -> ApiResult {
    Ok(json(StatusCode::OK, body))
}

fn latest_run(store: &ProjectStore, stage: Stage) -> Result<Option<StageRun>, ApiError> {
    let index = store.index()?;
    match index.latest_run.get(&stage) {
        Some(id) => Ok(Some(store.get(id)?)),
        None => Ok(None),
    }
}

#[derive(Serialize)]
struct ProjectSummary {
    project_id: String,
    created_at: String,
    documents: usize,
    theories: usize,
}

async fn projects(State(app): State<AppState>) -> ApiResult {
    let mut out = Vec::new();
    for id in app.projects().keys() {
        let store = app.reader(id)?;
        let project = store.project()?;
        out.push(ProjectSummary {
            project_id: project.project_id,
            created_at: project.created_at,
            documents: project.documents.len(),
            theories: store.index()?.ids(mathpvs_core::store::ArtifactKind::Theory).len(),
        });
    }
    ok(&out)
}

async fn statements(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = app.reader(&id)?;
    let records: Vec<StatementRecord> = match latest_run(&store, Stage::Extract)? {
        Some(run) => run.outputs.iter().map(|s| store.get(s)).collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    ok(&records)
}

#[derive(Serialize)]
struct GraphView {
    graph_id: String,
    #[serde(flatten)]
    graph: mathpvs_core::graph::ConceptGraph,
    topo_order: Vec<String>,
}

async fn graph(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = app.reader(&id)?;
    let graph_id = latest_run(&store, Stage::Graph)?
        .and_then(|r| r.outputs.first().cloned())
        .ok_or_else(|| ApiError::not_found("graph: the graph stage has not produced one"))?;
    let stored: StoredGraph = store.get(&graph_id)?;
    let topo_order = stored.graph.topo_order().unwrap_or_default();
    ok(&GraphView { graph_id, graph: stored.graph, topo_order })
}

#[derive(Serialize)]
struct TheoryView {
    #[serde(flatten)]
    version: TheoryVersion,
    text: String,
    diagnostics: Vec<Diagnostic>,
}

fn prelude(store: &ProjectStore) -> PreludeIndex {
    let config = store
        .project()
        .ok()
        .and_then(|p| PipelineConfig::from_value(&p.config).ok())
        .unwrap_or_default();
    PreludeIndex::bundled().with_renames(config.rename_table)
}

fn view(v: TheoryVersion, prelude: &PreludeIndex) -> TheoryView {
    let (_, diagnostics) = analyze(&v.text, prelude);
    TheoryView { text: v.text.clone(), version: v, diagnostics }
}

async fn theories(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = app.reader(&id)?;
    ok(&store.theories()?)
}

async fn theory(State(app): State<AppState>, Path((id, vid)): Path<(String, String)>) -> ApiResult {
    let store = app.reader(&id)?;
    let v = store.theory(&vid)?;
    ok(&view(v, &prelude(&store)))
}

#[derive(Deserialize)]
struct EditBody {
    text: String,
    note: String,
}

async fn edit_theory(
    State(app): State<AppState>,
    Path((id, vid)): Path<(String, String)>,
    Json(body): Json<EditBody>,
) -> ApiResult {
    let store = app.writer(&id)?;
    let v = pipeline::human_edit(&store, &vid, &body.text, &body.note)?;
    let status = if v.version_id == vid { StatusCode::OK } else { StatusCode::CREATED };
    Ok(json(status, &view(v, &prelude(&store))))
}

async fn lineage(State(app): State<AppState>, Path((id, vid)): Path<(String, String)>) -> ApiResult {
    let store = app.reader(&id)?;
    let prelude = prelude(&store);
    let chain: Vec<TheoryView> = store.lineage(&vid)?.into_iter().map(|v| view(v, &prelude)).collect();
    ok(&chain)
}

async fn run_stage(State(app): State<AppState>, Path((id, stage)): Path<(String, String)>) -> ApiResult {
    let stage: Stage = stage.parse().map_err(|e: String| ApiError::not_found(e))?;
    app.root(&id)?;
    let job = app.start_job(&id, stage)?;
    let setup = || -> Result<Pipeline, ApiError> {
        let store = app.writer(&id)?;
        let config = PipelineConfig::from_value(&store.project()?.config)?;
        Ok(Pipeline::new(store, config)?)
    };
    let pipeline = match setup() {
        Ok(p) => p,
        Err(e) => {
            app.finish_job(&job.run_id, Err(e.clone()));
            return Err(e);
        }
    };
    let worker = app.clone();
    let run_id = job.run_id.clone();
    tokio::task::spawn_blocking(move || {
        let outcome = pipeline.run_stage(stage).map_err(ApiError::from);
        worker.finish_job(&run_id, outcome);
    });
    Ok(json(StatusCode::ACCEPTED, &job))
}

async fn run_status(State(app): State<AppState>, Path(run_id): Path<String>) -> ApiResult {
    if let Some(job) = app.job(&run_id) {
        return ok(&job);
    }
    for id in app.projects().keys() {
        let store = app.reader(id)?;
        if store.contains(mathpvs_core::store::ArtifactKind::Run, &run_id) {
            let run: StageRun = store.get(&run_id)?;
            return ok(&run);
        }
    }
    Err(ApiError::not_found(format!("run `{run_id}`")))
}

#[derive(Deserialize)]
struct VerdictBody {
    stage: Stage,
    decision: Decision,
    note: String,
}

async fn verdict(State(app): State<AppState>, Path(id): Path<String>, Json(body): Json<VerdictBody>) -> ApiResult {
    let store = app.writer(&id)?;
    let v = pipeline::record_verdict(&store, body.stage, body.decision, &body.note)?;
    Ok(json(StatusCode::CREATED, &v))
}

#[derive(Deserialize)]
struct DiffQuery {
    from: String,
    to: String,
}

#[derive(Serialize)]
struct DiffView {
    from: String,
    to: String,
    diff: String,
}

async fn diff(State(app): State<AppState>, Path(id): Path<String>, Query(q): Query<DiffQuery>) -> ApiResult {
    let store = app.reader(&id)?;
    let a = store.theory(&q.from)?;
    let b = store.theory(&q.to)?;
    let diff = similar::TextDiff::from_lines(&a.text, &b.text)
        .unified_diff()
        .context_radius(3)
        .header(&q.from, &q.to)
        .to_string();
    ok(&DiffView { from: q.from, to: q.to, diff })
}

async fn report(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let report = pipeline::report_for(app.root(&id)?)?;
    ok(&report)
}
