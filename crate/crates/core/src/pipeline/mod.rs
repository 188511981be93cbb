//! Stage orchestration over a project store, with human gates.
//!
//! Stages run in a fixed order. Each run is stored as a [`StageRun`] whose
//! id depends only on its inputs, outputs, status and notes, so re-running a
//! stage on unchanged inputs stores nothing new.

mod config;
mod report;
mod stages;

pub use config::{AbstractionMode, PipelineConfig};
pub use report::{Report, ReportRow, StageSummary};

use crate::ingest::{DocFormat, IngestError};
use crate::llm::{Gateway, TranscriptStore, Transport};
use crate::prompt::{PromptError, TemplateRegistry};
use crate::pvs::PreludeIndex;
use crate::store::{
    Decision, Index, ProjectStore, Stage, StageRun, StageStatus, StoreError, TheoryVersion, Verdict,
};
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("the project has no documents")]
    NoDocuments,
    #[error("cannot run {stage}: upstream stage {upstream} is {state}")]
    UpstreamIncomplete { stage: Stage, upstream: Stage, state: String },
    #[error("stage {stage} failed: {message}")]
    StageFailed { stage: Stage, message: String },
    #[error("no verdict is possible for {stage}: {reason}")]
    GateViolation { stage: Stage, reason: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

impl PipelineError {
    fn failed(stage: Stage, e: impl std::fmt::Display) -> PipelineError {
        PipelineError::StageFailed { stage, message: e.to_string() }
    }
}

/// Gate state of a stage as seen from downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateState {
    NotRun,
    Ok,
    NeedsHuman,
    Approved,
    Rejected,
    Failed,
}

impl GateState {
    pub fn passes(self) -> bool {
        matches!(self, GateState::Ok | GateState::Approved)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GateState::NotRun => "not run",
            GateState::Ok => "ok",
            GateState::NeedsHuman => "waiting for a human verdict",
            GateState::Approved => "approved",
            GateState::Rejected => "rejected",
            GateState::Failed => "failed",
        }
    }
}

pub struct Pipeline {
    store: ProjectStore,
    config: PipelineConfig,
    gateway: Gateway,
    prelude: PreludeIndex,
    templates: TemplateRegistry,
}

impl Pipeline {
    /// Pipeline over a writable store, talking HTTP when the gateway mode
    /// asks for it. The credential is read from the configured variable.
    pub fn new(store: ProjectStore, config: PipelineConfig) -> Result<Pipeline, PipelineError> {
        let transcripts = Self::transcript_store(&store, &config);
        let gateway = Gateway::http(config.gateway.clone(), transcripts).map_err(|e| PipelineError::Config(e.to_string()))?;
        Self::assemble(store, config, gateway)
    }

    /// Pipeline with an explicit transport, for tests and offline tools.
    pub fn with_transport(
        store: ProjectStore,
        config: PipelineConfig,
        transport: Arc<dyn Transport>,
    ) -> Result<Pipeline, PipelineError> {
        let transcripts = Self::transcript_store(&store, &config);
        let gateway = Gateway::new(config.gateway.clone(), transport, transcripts);
        Self::assemble(store, config, gateway)
    }

    fn transcript_store(store: &ProjectStore, config: &PipelineConfig) -> TranscriptStore {
        let ts = TranscriptStore::new(store.transcripts_dir());
        if config.bundled_transcripts {
            let bundled = crate::fixtures::transcripts();
            ts.with_embedded(bundled.iter().map(|(h, t)| (h.as_str(), t.as_str())))
        } else {
            ts
        }
    }

    fn assemble(store: ProjectStore, config: PipelineConfig, gateway: Gateway) -> Result<Pipeline, PipelineError> {
        if !store.is_writer() {
            return Err(StoreError::ReadOnly.into());
        }
        let templates = match &config.template_dir {
            Some(dir) => TemplateRegistry::with_dir(dir),
            None => Ok(TemplateRegistry::bundled()),
        }
        .map_err(|e: PromptError| PipelineError::Config(e.to_string()))?;
        let prelude = PreludeIndex::bundled().with_renames(config.rename_table.clone());
        Ok(Pipeline { store, config, gateway, prelude, templates })
    }

    pub fn store(&self) -> &ProjectStore {
        &self.store
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn prelude(&self) -> &PreludeIndex {
        &self.prelude
    }

    pub fn into_store(self) -> ProjectStore {
        self.store
    }

    pub(crate) fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub(crate) fn templates(&self) -> &TemplateRegistry {
        &self.templates
    }

    /// Load a document into the project and record an ingest run.
    pub fn ingest(&self, bytes: &[u8], hint: Option<DocFormat>) -> Result<StageRun, PipelineError> {
        let (doc, _) = crate::ingest::ingest_bytes(bytes, hint)?;
        self.store.put(&doc)?;
        self.run_stage(Stage::Ingest)
    }

    pub fn gate_state(&self, index: &Index, stage: Stage) -> Result<GateState, PipelineError> {
        gate_state_in(&self.store, index, stage)
    }

    fn check_upstream(&self, stage: Stage) -> Result<(), PipelineError> {
        let index = self.store.index()?;
        for &upstream in stage.upstream() {
            let state = self.gate_state(&index, upstream)?;
            if !state.passes() {
                return Err(PipelineError::UpstreamIncomplete {
                    stage,
                    upstream,
                    state: state.as_str().into(),
                });
            }
        }
        Ok(())
    }

    /// Run one stage after checking that every upstream stage passed.
    pub fn run_stage(&self, stage: Stage) -> Result<StageRun, PipelineError> {
        self.check_upstream(stage)?;
        let run = match stage {
            Stage::Ingest => self.stage_ingest(),
            Stage::Extract => self.stage_extract(),
            Stage::Graph => self.stage_graph(),
            Stage::Summarize => self.stage_summarize(),
            Stage::Abstract => self.stage_abstract(),
            Stage::Formalize => self.stage_formalize(),
            Stage::Repair => self.stage_repair(),
            Stage::Merge => self.stage_merge(),
            Stage::Check => self.stage_check(),
            Stage::Prove => self.stage_prove(),
        }?;
        self.store.put(&run)?;
        log::info!("{stage}: {:?} ({} outputs)", run.status, run.outputs.len());
        Ok(run)
    }

    /// Run stages in order until the end, `stop_at`, or the first stage
    /// that does not pass. Run ids are content-addressed, so re-running a
    /// stage whose gate was approved yields the same run and stays approved.
    pub fn run_all(&self, stop_at: Option<Stage>) -> Result<Vec<StageRun>, PipelineError> {
        if self.store.project()?.documents.is_empty() {
            return Err(PipelineError::NoDocuments);
        }
        let mut runs = Vec::new();
        for stage in Stage::ALL {
            let run = self.run_stage(stage)?;
            runs.push(run);
            let state = self.gate_state(&self.store.index()?, stage)?;
            if !state.passes() || stop_at == Some(stage) {
                break;
            }
        }
        Ok(runs)
    }

    /// Record a verdict on the latest run of a gated stage.
    pub fn record_verdict(&self, stage: Stage, decision: Decision, note: &str) -> Result<Verdict, PipelineError> {
        record_verdict(&self.store, stage, decision, note)
    }

    /// Store a human edit of `parent`. Identical text returns the parent.
    pub fn human_edit(&self, parent_id: &str, text: &str, note: &str) -> Result<TheoryVersion, PipelineError> {
        human_edit(&self.store, parent_id, text, note)
    }

    pub fn report(&self) -> Result<Report, PipelineError> {
        report::build(self)
    }
}

pub(crate) fn gate_state_in(store: &ProjectStore, index: &Index, stage: Stage) -> Result<GateState, PipelineError> {
    let Some(run_id) = index.latest_run.get(&stage) else {
        return Ok(GateState::NotRun);
    };
    let run: StageRun = store.get(run_id)?;
    Ok(match run.status {
        StageStatus::Ok => GateState::Ok,
        StageStatus::Failed => GateState::Failed,
        StageStatus::NeedsHuman => match index.latest_verdict.get(&stage) {
            Some(vid) => {
                let v: Verdict = store.get(vid)?;
                match (v.run_id == run.run_id, v.decision) {
                    (true, Decision::Approve) => GateState::Approved,
                    (true, Decision::Reject) => GateState::Rejected,
                    (false, _) => GateState::NeedsHuman,
                }
            }
            None => GateState::NeedsHuman,
        },
    })
}

/// Record a verdict on the latest run of `stage`, which must be waiting
/// for a human.
pub fn record_verdict(store: &ProjectStore, stage: Stage, decision: Decision, note: &str) -> Result<Verdict, PipelineError> {
    let index = store.index()?;
    let run_id = index.latest_run.get(&stage).ok_or_else(|| PipelineError::GateViolation {
        stage,
        reason: "the stage has not run".into(),
    })?;
    let run: StageRun = store.get(run_id)?;
    if run.status != StageStatus::NeedsHuman {
        return Err(PipelineError::GateViolation {
            stage,
            reason: format!("its latest run is {:?}, not waiting for a human", run.status),
        });
    }
    let verdict = Verdict::new(stage, &run.run_id, decision, note);
    store.put(&verdict)?;
    Ok(verdict)
}

/// Store a human edit of `parent_id`. Identical text returns the parent.
pub fn human_edit(store: &ProjectStore, parent_id: &str, text: &str, note: &str) -> Result<TheoryVersion, PipelineError> {
    let parent = store.theory(parent_id)?;
    let text = crate::canonical::normalize_newlines(text);
    if text == parent.text {
        return Ok(parent);
    }
    let v = TheoryVersion::new(text, crate::store::Origin::Human, Some(parent.version_id.clone()), parent.stmt_ids)
        .with_note(note);
    store.put(&v)?;
    Ok(v)
}

/// Read-only report over a project that may be locked by a writer.
pub fn report_for(root: &Path) -> Result<Report, PipelineError> {
    report::build_from_store(&ProjectStore::open(root)?)
}
