use mathpvs_core::fixtures::{self, FixtureResponder, FINAL_THEORY, FINAL_THEORY_NOTE, SUMMARY_MMD, SUMMARY_TEX};
use mathpvs_core::llm::{FailingTransport, GatewayMode};
use mathpvs_core::pipeline::{GateState, Pipeline, PipelineConfig, PipelineError};
use mathpvs_core::prover::ProofStatus;
use mathpvs_core::pvs::parse_theory;
use mathpvs_core::store::{
    Decision, MergeRecord, Origin, ProjectStore, RepairRecord, Stage, StageStatus, StoredProof, TheoryVersion,
};
use std::collections::BTreeSet;
use std::sync::Arc;

fn offline(dir: &tempfile::TempDir, config: PipelineConfig) -> Pipeline {
    let store = ProjectStore::init(dir.path().join("p"), "p", config.to_json()).unwrap();
    Pipeline::with_transport(store, config, Arc::new(FailingTransport::default())).unwrap()
}

fn ungated() -> PipelineConfig {
    PipelineConfig { require_merge_approval: false, ..PipelineConfig::fixture() }
}

fn fixture_project(dir: &tempfile::TempDir) -> Pipeline {
    let p = offline(dir, ungated());
    p.ingest(SUMMARY_TEX.as_bytes(), None).unwrap();
    p
}

fn theory_ids(p: &Pipeline) -> BTreeSet<String> {
    p.store().theories().unwrap().into_iter().map(|v| v.version_id).collect()
}

#[test]
fn full_replay_run_passes_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture_project(&dir);
    let runs = p.run_all(None).unwrap();
    let stages: Vec<Stage> = runs.iter().map(|r| r.stage).collect();
    assert_eq!(stages, Stage::ALL.to_vec());
    for r in &runs {
        assert_eq!(r.status, StageStatus::Ok, "{}: {:?}", r.stage, r.notes);
    }

    let formalized = &runs[Stage::Formalize.index()].outputs;
    assert_eq!(formalized.len(), 5);
    for vid in formalized {
        assert_eq!(p.store().theory(vid).unwrap().origin, Origin::Llm);
    }

    let repairs: Vec<RepairRecord> = p.store().all().unwrap();
    let edited: Vec<&RepairRecord> = repairs.iter().filter(|r| r.to_version.is_some()).collect();
    assert_eq!(edited.len(), 1, "only the mapping theory needs repair");
    let rules: BTreeSet<&str> = edited[0].log.entries.iter().map(|e| e.rule_id.as_str()).collect();
    assert!(rules.contains("rewrite_header"));
    assert!(rules.contains("move_importing_after_begin"));
    assert!(rules.contains("rename_reference"));

    let merged_id = &runs[Stage::Merge.index()].outputs[0];
    let merged = p.store().theory(merged_id).unwrap();
    assert_eq!(merged.origin, Origin::Merge);
    assert_eq!(merged.theory_name, fixtures::MERGED_THEORY_NAME);
    assert_eq!(merged.stmt_ids.len(), 5);
    assert!(parse_theory(&merged.text).is_clean());
    let merges: Vec<MergeRecord> = p.store().all().unwrap();
    assert_eq!(merges.len(), 1);
    assert_eq!(merges[0].members.len(), 5);

    let proofs: Vec<StoredProof> = p.store().all().unwrap();
    assert_eq!(proofs.len(), 1);
    assert_eq!(proofs[0].attempt.formula_name, fixtures::MAIN_THEOREM);
    assert_eq!(proofs[0].attempt.status, ProofStatus::SkippedStub);

    let report = p.report().unwrap();
    assert_eq!(report.statements.len(), 5);
    assert!(report.statements.iter().all(|r| r.checked == Some(true)));
    assert!(report.to_string().contains("skipped_stub"));
}

#[test]
fn rerun_adds_no_artifacts_and_ids_are_deterministic() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let p1 = fixture_project(&d1);
    let p2 = fixture_project(&d2);
    let runs1: Vec<String> = p1.run_all(None).unwrap().into_iter().map(|r| r.run_id).collect();
    let count = p1.store().artifact_count().unwrap();
    let again: Vec<String> = p1.run_all(None).unwrap().into_iter().map(|r| r.run_id).collect();
    assert_eq!(runs1, again);
    assert_eq!(p1.store().artifact_count().unwrap(), count);

    let runs2: Vec<String> = p2.run_all(None).unwrap().into_iter().map(|r| r.run_id).collect();
    assert_eq!(runs1, runs2);
    assert_eq!(theory_ids(&p1), theory_ids(&p2));
    p1.store().replay_journal().unwrap();
}

#[test]
fn markdown_summary_yields_the_same_statements() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let tex = fixture_project(&d1);
    let mmd = offline(&d2, PipelineConfig::fixture());
    mmd.ingest(SUMMARY_MMD.as_bytes(), None).unwrap();
    let a = tex.run_all(Some(Stage::Extract)).unwrap();
    let b = mmd.run_all(Some(Stage::Extract)).unwrap();
    assert_eq!(a.last().unwrap().outputs.len(), b.last().unwrap().outputs.len());
}

#[test]
fn stop_at_and_upstream_checks() {
    let dir = tempfile::tempdir().unwrap();
    let p = offline(&dir, PipelineConfig::fixture());
    assert_eq!(p.run_all(None).unwrap_err(), PipelineError::NoDocuments);
    assert!(matches!(
        p.run_stage(Stage::Formalize),
        Err(PipelineError::UpstreamIncomplete { upstream: Stage::Ingest, .. })
    ));
    p.ingest(SUMMARY_TEX.as_bytes(), None).unwrap();
    let runs = p.run_all(Some(Stage::Graph)).unwrap();
    assert_eq!(runs.len(), 3);
    assert!(matches!(
        p.run_stage(Stage::Abstract),
        Err(PipelineError::UpstreamIncomplete { upstream: Stage::Summarize, .. })
    ));
    assert!(theory_ids(&p).is_empty());
}

#[test]
fn replay_miss_fails_the_stage_without_network() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = PipelineConfig::fixture();
    config.bundled_transcripts = false;
    let p = offline(&dir, config);
    p.ingest(SUMMARY_TEX.as_bytes(), None).unwrap();
    let err = p.run_all(None).unwrap_err();
    assert!(matches!(err, PipelineError::StageFailed { stage: Stage::Abstract, .. }), "{err}");
}

#[test]
fn recording_with_the_responder_matches_the_bundled_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = PipelineConfig::fixture();
    config.gateway.mode = GatewayMode::Record;
    config.bundled_transcripts = false;
    let store = ProjectStore::init(dir.path().join("p"), "p", config.to_json()).unwrap();
    let p = Pipeline::with_transport(store, config, Arc::new(FixtureResponder::new())).unwrap();
    p.ingest(SUMMARY_TEX.as_bytes(), None).unwrap();
    p.run_all(Some(Stage::Formalize)).unwrap();
    let recorded: BTreeSet<String> = mathpvs_core::llm::TranscriptStore::new(p.store().transcripts_dir())
        .list()
        .unwrap()
        .into_iter()
        .collect();
    let bundled: BTreeSet<String> = fixtures::transcripts().into_iter().map(|(h, _)| h).collect();
    assert_eq!(recorded, bundled);
}

#[test]
fn merge_gate_needs_an_approval() {
    let dir = tempfile::tempdir().unwrap();
    let p = offline(&dir, PipelineConfig::fixture());
    p.ingest(SUMMARY_TEX.as_bytes(), None).unwrap();

    let runs = p.run_all(None).unwrap();
    let last = runs.last().unwrap();
    assert_eq!((last.stage, last.status), (Stage::Merge, StageStatus::NeedsHuman));
    assert!(matches!(p.run_stage(Stage::Check), Err(PipelineError::UpstreamIncomplete { .. })));
    assert!(matches!(
        p.record_verdict(Stage::Formalize, Decision::Approve, "fine"),
        Err(PipelineError::GateViolation { .. })
    ));
    assert!(matches!(
        p.record_verdict(Stage::Merge, Decision::Approve, " "),
        Err(PipelineError::Store(_))
    ));

    p.record_verdict(Stage::Merge, Decision::Reject, "not yet").unwrap();
    let index = p.store().index().unwrap();
    assert_eq!(p.gate_state(&index, Stage::Merge).unwrap(), GateState::Rejected);
    p.record_verdict(Stage::Merge, Decision::Approve, "members reviewed").unwrap();
    let runs = p.run_all(None).unwrap();
    assert!(runs.iter().all(|r| r.status == StageStatus::Ok), "{runs:?}");
    assert_eq!(runs.last().unwrap().stage, Stage::Prove);
}

#[test]
fn human_edit_of_the_merge_is_checked_and_traced() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture_project(&dir);
    let runs = p.run_all(None).unwrap();
    let merged = runs[Stage::Merge.index()].outputs[0].clone();
    let same = p.human_edit(&merged, &p.store().theory(&merged).unwrap().text, "no change").unwrap();
    assert_eq!(same.version_id, merged);

    let edited = p.human_edit(&merged, FINAL_THEORY, FINAL_THEORY_NOTE).unwrap();
    assert_eq!(edited.version_id, TheoryVersion::id_for_text(FINAL_THEORY));
    let origins: Vec<Origin> = p.store().lineage(&edited.version_id).unwrap().iter().map(|v| v.origin).collect();
    assert_eq!(origins, vec![Origin::Llm, Origin::Repair, Origin::Merge, Origin::Human]);

    let check = p.run_stage(Stage::Check).unwrap();
    assert_eq!(check.inputs, vec![edited.version_id.clone()]);
    assert_eq!(check.status, StageStatus::Ok, "{:?}", check.notes);
    let prove = p.run_stage(Stage::Prove).unwrap();
    assert_eq!(prove.inputs, vec![edited.version_id]);
    assert_eq!(prove.status, StageStatus::Ok);
    p.store().replay_journal().unwrap();
}
