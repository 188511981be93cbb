use super::{gate_state_in, Pipeline, PipelineError};
use crate::ingest::{StatementKind, StatementRecord};
use crate::prover::ProofStatus;
use crate::store::{ProjectStore, Stage, StageRun, StoredCheck, StoredProof};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageSummary {
    pub stage: Stage,
    pub state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run_id: Option<String>,
    pub notes: Vec<String>,
}

/// How far one statement got through the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub stmt_id: String,
    pub name: String,
    pub extracted: bool,
    pub formalized: Option<String>,
    pub repaired: Option<String>,
    pub merged: Option<String>,
    pub checked: Option<bool>,
    pub proved: Option<ProofStatus>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub project_id: String,
    pub stages: Vec<StageSummary>,
    pub statements: Vec<ReportRow>,
}

pub(super) fn build(p: &Pipeline) -> Result<Report, PipelineError> {
    build_from_store(p.store())
}

fn latest(store: &ProjectStore, runs: &BTreeMap<Stage, String>, stage: Stage) -> Result<Option<StageRun>, PipelineError> {
    runs.get(&stage).map(|id| store.get(id)).transpose().map_err(Into::into)
}

/// Map each statement to the version among `vids` that covers it.
fn by_statement(store: &ProjectStore, vids: &[String]) -> Result<BTreeMap<String, String>, PipelineError> {
    let mut out = BTreeMap::new();
    for vid in vids {
        for s in store.theory(vid)?.stmt_ids {
            out.insert(s, vid.clone());
        }
    }
    Ok(out)
}

pub(super) fn build_from_store(store: &ProjectStore) -> Result<Report, PipelineError> {
    let index = store.index()?;
    let mut stages = Vec::new();
    for stage in Stage::ALL {
        let state = gate_state_in(store, &index, stage)?;
        let run = latest(store, &index.latest_run, stage)?;
        stages.push(StageSummary {
            stage,
            state: state.as_str().into(),
            run_id: run.as_ref().map(|r| r.run_id.clone()),
            notes: run.map(|r| r.notes).unwrap_or_default(),
        });
    }

    let outputs = |stage| -> Result<Vec<String>, PipelineError> {
        Ok(latest(store, &index.latest_run, stage)?.map(|r| r.outputs).unwrap_or_default())
    };
    let stmts: Vec<StatementRecord> = outputs(Stage::Extract)?
        .iter()
        .map(|id| store.get(id))
        .collect::<Result<_, _>>()?;
    let formalized = by_statement(store, &outputs(Stage::Formalize)?)?;
    let repaired = by_statement(store, &outputs(Stage::Repair)?)?;
    let merged = by_statement(store, &outputs(Stage::Merge)?)?;

    let check_run = latest(store, &index.latest_run, Stage::Check)?;
    let checked_version = check_run.as_ref().and_then(|r| r.inputs.first().cloned());
    let check_ok = match check_run.as_ref().and_then(|r| r.outputs.first()) {
        Some(id) => Some(store.get::<StoredCheck>(id)?.result.typecheck_ok),
        None => None,
    };
    let proofs: Vec<StoredProof> = outputs(Stage::Prove)?
        .iter()
        .map(|id| store.get(id))
        .collect::<Result<_, _>>()?;
    let proved = proofs.iter().map(|p| p.attempt.status).max_by_key(|s| match s {
        ProofStatus::Proved => 0,
        ProofStatus::SkippedStub => 1,
        ProofStatus::Unfinished => 2,
        ProofStatus::Timeout => 3,
        ProofStatus::Error => 4,
    });
    let covered = |vid: &Option<String>| -> Result<Vec<String>, PipelineError> {
        Ok(match vid {
            Some(v) => store.theory(v)?.stmt_ids,
            None => vec![],
        })
    };
    let checked_stmts = covered(&checked_version)?;

    let statements = stmts
        .iter()
        .filter(|s| !matches!(s.kind, StatementKind::Proof | StatementKind::Remark))
        .map(|s| {
            let in_check = checked_stmts.contains(&s.stmt_id);
            ReportRow {
                stmt_id: s.stmt_id.clone(),
                name: s.display_name(),
                extracted: true,
                formalized: formalized.get(&s.stmt_id).cloned(),
                repaired: repaired.get(&s.stmt_id).cloned(),
                merged: merged.get(&s.stmt_id).cloned(),
                checked: check_ok.filter(|_| in_check),
                proved: proved.filter(|_| in_check),
            }
        })
        .collect();
    Ok(Report { project_id: store.project()?.project_id, stages, statements })
}

fn cell(v: &Option<String>) -> &str {
    match v {
        Some(id) => id,
        None => "-",
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "project {}", self.project_id)?;
        writeln!(f)?;
        for s in &self.stages {
            writeln!(f, "{:<10} {}", s.stage.as_str(), s.state)?;
            for n in &s.notes {
                writeln!(f, "           {n}")?;
            }
        }
        writeln!(f)?;
        writeln!(f, "{:<40} {:<22} {:<22} {:<22} {:<8} proved", "statement", "formalized", "repaired", "merged", "checked")?;
        for r in &self.statements {
            let checked = match r.checked {
                Some(true) => "ok",
                Some(false) => "failed",
                None => "-",
            };
            let proved = r
                .proved
                .map(|p| serde_json::to_value(p).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default())
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{:<40} {:<22} {:<22} {:<22} {:<8} {}",
                r.name,
                cell(&r.formalized),
                cell(&r.repaired),
                cell(&r.merged),
                checked,
                proved
            )?;
        }
        Ok(())
    }
}
