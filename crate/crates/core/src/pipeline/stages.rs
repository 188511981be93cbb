use super::{AbstractionMode, GateState, Pipeline, PipelineError};
use crate::canonical::normalize_newlines;
use crate::graph::{build_graph, ConceptGraph};
use crate::ingest::{extract_statements, SourceDocument, StatementKind, StatementRecord};
use crate::llm::PromptTranscript;
use crate::merge::{merge, MergeNote, MergePlan};
use crate::prompt::{pvs_block, RenderedPrompt, ABSTRACT, FORMALIZE, SUMMARIZE};
use crate::prover::{self, BackendKind, ProofStatus, ProverError};
use crate::pvs::{parse_theory, DeclKind, FormulaClass};
use crate::repair::{repair_to_fixpoint, RepairError};
use crate::store::{
    Abstraction, Decision, MergeRecord, Origin, RepairRecord, Stage, StageRun, StageStatus, StoredCheck,
    StoredGraph, StoredProof, TheoryVersion, Verdict,
};
use std::collections::BTreeMap;

type StageResult = Result<StageRun, PipelineError>;

fn run(stage: Stage, inputs: Vec<String>, outputs: Vec<String>, status: StageStatus, notes: Vec<String>) -> StageResult {
    Ok(StageRun::new(stage, inputs, outputs, status, notes))
}

/// `cantor space` becomes `CantorSpace`.
fn camel(words: &str) -> String {
    words
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut cs = w.chars();
            cs.next().map(|c| c.to_ascii_uppercase().to_string() + cs.as_str()).unwrap_or_default()
        })
        .collect()
}

fn formalizable(s: &StatementRecord) -> bool {
    !matches!(s.kind, StatementKind::Proof | StatementKind::Remark)
}

impl Pipeline {
    fn latest_run(&self, stage: Stage) -> Result<StageRun, PipelineError> {
        let index = self.store().index()?;
        let id = index.latest_run.get(&stage).ok_or(PipelineError::UpstreamIncomplete {
            stage,
            upstream: stage,
            state: "not run".into(),
        })?;
        Ok(self.store().get(id)?)
    }

    fn statements(&self) -> Result<Vec<StatementRecord>, PipelineError> {
        self.latest_run(Stage::Extract)?
            .outputs
            .iter()
            .map(|id| Ok(self.store().get(id)?))
            .collect()
    }

    fn graph(&self) -> Result<(String, ConceptGraph), PipelineError> {
        let run = self.latest_run(Stage::Graph)?;
        let id = run.outputs.first().ok_or_else(|| PipelineError::failed(Stage::Graph, "no graph stored"))?;
        let g: StoredGraph = self.store().get(id)?;
        Ok((id.clone(), g.graph))
    }

    /// Formalizable statements in dependency order.
    fn ordered_statements(&self, stage: Stage) -> Result<(String, ConceptGraph, Vec<StatementRecord>), PipelineError> {
        let (graph_id, graph) = self.graph()?;
        let by_id: BTreeMap<String, StatementRecord> =
            self.statements()?.into_iter().map(|s| (s.stmt_id.clone(), s)).collect();
        let order = graph.topo_order().map_err(|e| PipelineError::failed(stage, e))?;
        let stmts = order
            .iter()
            .filter_map(|id| by_id.get(id))
            .filter(|s| formalizable(s))
            .cloned()
            .collect();
        Ok((graph_id, graph, stmts))
    }

    /// Complete prompts with bounded concurrency, keeping their order.
    fn complete_all(&self, stage: Stage, prompts: &[RenderedPrompt]) -> Result<Vec<PromptTranscript>, PipelineError> {
        let width = self.config().parallelism.max(1);
        let mut out = Vec::with_capacity(prompts.len());
        for chunk in prompts.chunks(width) {
            let results: Vec<_> = std::thread::scope(|s| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|p| s.spawn(move || self.gateway().complete_prompt(p)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("model call panicked")).collect()
            });
            for r in results {
                let t = r.map_err(|e| PipelineError::failed(stage, e))?;
                self.store().put(&t)?;
                out.push(t);
            }
        }
        Ok(out)
    }

    fn render(&self, stage: Stage, template: &str, bindings: &[(&str, String)]) -> Result<RenderedPrompt, PipelineError> {
        let map: BTreeMap<String, String> = bindings.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        self.templates()
            .latest(template)
            .and_then(|t| t.render(&map))
            .map_err(|e| PipelineError::failed(stage, e))
    }

    pub(super) fn stage_ingest(&self) -> StageResult {
        let docs = self.store().project()?.documents;
        if docs.is_empty() {
            return Err(PipelineError::NoDocuments);
        }
        for id in &docs {
            self.store().get::<SourceDocument>(id)?;
        }
        let note = format!("{} document(s)", docs.len());
        run(Stage::Ingest, vec![], docs, StageStatus::Ok, vec![note])
    }

    pub(super) fn stage_extract(&self) -> StageResult {
        let docs = self.latest_run(Stage::Ingest)?.outputs;
        let mut outputs = Vec::new();
        let mut notes = Vec::new();
        for id in &docs {
            let doc: SourceDocument = self.store().get(id)?;
            let stmts = extract_statements(&doc);
            notes.push(format!("{id}: {} statement(s)", stmts.len()));
            for s in &stmts {
                outputs.push(self.store().put(s)?);
            }
        }
        let status = if outputs.is_empty() { StageStatus::Failed } else { StageStatus::Ok };
        run(Stage::Extract, docs, outputs, status, notes)
    }

    pub(super) fn stage_graph(&self) -> StageResult {
        let extract = self.latest_run(Stage::Extract)?;
        let stmts = self.statements()?;
        let built = build_graph(&stmts).and_then(|g| g.topo_order().map(|_| g));
        let graph = match built {
            Ok(g) => g,
            Err(e) => return run(Stage::Graph, extract.outputs, vec![], StageStatus::Failed, vec![e.to_string()]),
        };
        let note = format!("{} node(s), {} edge(s)", graph.nodes.len(), graph.edges.len());
        let stored = StoredGraph::new(&extract.inputs.join("+"), graph);
        let id = self.store().put(&stored)?;
        run(Stage::Graph, extract.outputs, vec![id], StageStatus::Ok, vec![note])
    }

    pub(super) fn stage_summarize(&self) -> StageResult {
        let docs = self.latest_run(Stage::Ingest)?.outputs;
        if !self.config().summarize {
            return run(Stage::Summarize, docs, vec![], StageStatus::Ok, vec!["disabled by configuration".into()]);
        }
        let mut prompts = Vec::new();
        for id in &docs {
            let doc: SourceDocument = self.store().get(id)?;
            let title = doc.title.clone().unwrap_or_default();
            prompts.push(self.render(Stage::Summarize, SUMMARIZE, &[("document_text", doc.raw_text), ("title", title)])?);
        }
        let outputs = self
            .complete_all(Stage::Summarize, &prompts)?
            .into_iter()
            .map(|t| t.request_hash)
            .collect();
        run(Stage::Summarize, docs, outputs, StageStatus::Ok, vec![])
    }

    pub(super) fn stage_abstract(&self) -> StageResult {
        let (graph_id, graph, stmts) = self.ordered_statements(Stage::Abstract)?;
        let by_id: BTreeMap<&str, &StatementRecord> = stmts.iter().map(|s| (s.stmt_id.as_str(), s)).collect();
        let mut prompts = Vec::new();
        for s in &stmts {
            let ancestors = graph.ancestors_in_order(&s.stmt_id).map_err(|e| PipelineError::failed(Stage::Abstract, e))?;
            let context: Vec<String> = ancestors
                .iter()
                .filter_map(|a| by_id.get(a.as_str()))
                .map(|a| format!("- {}: {}", a.display_name(), a.body_latex.trim()))
                .collect();
            prompts.push(self.render(
                Stage::Abstract,
                ABSTRACT,
                &[
                    ("statement_body", s.body_latex.trim().to_owned()),
                    ("statement_label", s.display_name()),
                    ("context", if context.is_empty() { "(none)".into() } else { context.join("\n") }),
                ],
            )?);
        }
        let transcripts = self.complete_all(Stage::Abstract, &prompts)?;
        let mut outputs = Vec::new();
        for (s, t) in stmts.iter().zip(&transcripts) {
            let a = Abstraction::new(&s.stmt_id, &t.request_hash, t.response_text.trim());
            outputs.push(self.store().put(&a)?);
        }
        run(Stage::Abstract, vec![graph_id], outputs, StageStatus::Ok, vec![])
    }

    pub(super) fn stage_formalize(&self) -> StageResult {
        let (graph_id, graph, stmts) = self.ordered_statements(Stage::Formalize)?;
        let abstract_ids = self.latest_run(Stage::Abstract)?.outputs;
        let mut abstraction: BTreeMap<String, String> = BTreeMap::new();
        for id in &abstract_ids {
            let a: Abstraction = self.store().get(id)?;
            abstraction.insert(a.stmt_id, a.text);
        }
        let labels: BTreeMap<&str, String> = stmts.iter().map(|s| (s.stmt_id.as_str(), s.display_name())).collect();
        let mut prompts = Vec::new();
        for s in &stmts {
            let ancestors = graph.ancestors_in_order(&s.stmt_id).map_err(|e| PipelineError::failed(Stage::Formalize, e))?;
            let context: Vec<String> = ancestors
                .iter()
                .filter_map(|a| Some(format!("- {}: {}", labels.get(a.as_str())?, abstraction.get(a)?)))
                .collect();
            let context = if context.is_empty() { "(none)".to_owned() } else { context.join("\n") };
            let own = abstraction.get(&s.stmt_id).cloned().unwrap_or_default();
            let name = camel(s.canonical_term().unwrap_or(&s.display_name()));
            let mut bindings = vec![
                ("statement_label", s.display_name()),
                ("context", context),
                ("theory_name", name),
            ];
            match self.config().abstraction {
                AbstractionMode::Supplement => {
                    bindings.push(("statement_body", s.body_latex.trim().to_owned()));
                    bindings.push(("abstraction", own));
                }
                AbstractionMode::Replace => bindings.push(("statement_body", own)),
            }
            prompts.push(self.render(Stage::Formalize, FORMALIZE, &bindings)?);
        }
        let transcripts = self.complete_all(Stage::Formalize, &prompts)?;
        let mut outputs = Vec::new();
        let mut notes = Vec::new();
        for (s, t) in stmts.iter().zip(&transcripts) {
            let Some(block) = pvs_block(&t.response_text) else {
                notes.push(format!("{}: no PVS theory in the response", s.display_name()));
                continue;
            };
            let v = TheoryVersion::new(normalize_newlines(&block.text), Origin::Llm, None, vec![s.stmt_id.clone()]);
            notes.push(format!("{}: theory {}", s.display_name(), v.theory_name));
            outputs.push(self.store().put(&v)?);
        }
        let status = if outputs.len() == stmts.len() { StageStatus::Ok } else { StageStatus::Failed };
        let mut inputs = vec![graph_id];
        inputs.extend(abstract_ids);
        run(Stage::Formalize, inputs, outputs, status, notes)
    }

    pub(super) fn stage_repair(&self) -> StageResult {
        let inputs = self.latest_run(Stage::Formalize)?.outputs;
        let mut outputs = Vec::new();
        let mut notes = Vec::new();
        let mut residual = false;
        for vid in &inputs {
            let v = self.store().theory(vid)?;
            let outcome = match repair_to_fixpoint(&v.text, self.config().max_repair_passes, self.prelude()) {
                Ok(o) => o,
                Err(RepairError::MaxPassesExceeded { partial, .. }) => {
                    notes.push(format!("{}: pass limit reached", v.theory_name));
                    *partial
                }
                Err(e) => return Err(PipelineError::failed(Stage::Repair, e)),
            };
            let to = if outcome.log.is_empty() {
                None
            } else {
                let repaired = TheoryVersion::new(outcome.text.clone(), Origin::Repair, Some(v.version_id.clone()), v.stmt_ids.clone());
                Some(self.store().put(&repaired)?)
            };
            let record = RepairRecord::new(vid, to.clone(), &outcome);
            let record_id = self.store().put(&record)?;
            let errors = outcome.remaining_errors().count();
            residual |= errors > 0;
            notes.push(format!(
                "{}: {} edit(s) in {} pass(es), {} residual error(s) [{}]",
                v.theory_name,
                outcome.log.len(),
                outcome.passes,
                errors,
                record_id
            ));
            outputs.push(to.unwrap_or_else(|| vid.clone()));
        }
        let status = if residual { StageStatus::NeedsHuman } else { StageStatus::Ok };
        run(Stage::Repair, inputs, outputs, status, notes)
    }

    pub(super) fn stage_merge(&self) -> StageResult {
        let inputs = self.latest_run(Stage::Repair)?.outputs;
        if inputs.is_empty() {
            return run(Stage::Merge, inputs, vec![], StageStatus::Failed, vec!["nothing to merge".into()]);
        }
        if self.config().require_merge_approval {
            let gate = StageRun::new(
                Stage::Merge,
                inputs.clone(),
                vec![],
                StageStatus::NeedsHuman,
                vec!["approval required before merging".into()],
            );
            let approved = self.store().all::<Verdict>()?.iter().any(|v| {
                v.run_id == gate.run_id && v.decision == Decision::Approve
            });
            if !approved {
                return Ok(gate);
            }
        }

        let index = self.store().index()?;
        let repair_approved = self.gate_state(&index, Stage::Repair)? == GateState::Approved;
        let mut members = Vec::new();
        let mut stmt_ids = Vec::new();
        let mut unclean = Vec::new();
        for vid in &inputs {
            let v = self.store().theory(vid)?;
            if !repair_approved && !prover::check_stub(&v.text, self.prelude()).typecheck_ok {
                unclean.push(format!("{} is not stub-clean", v.theory_name));
            }
            let Some(ast) = parse_theory(&v.text).ast else {
                unclean.push(format!("{} does not parse", v.theory_name));
                continue;
            };
            members.push(ast);
            stmt_ids.extend(v.stmt_ids.iter().cloned());
        }
        if !unclean.is_empty() {
            return run(Stage::Merge, inputs, vec![], StageStatus::NeedsHuman, unclean);
        }
        let mut plan = MergePlan::new(self.config().merged_theory_name.clone(), members);
        plan.rename_map = self.config().merge_rename_map()?;
        let (ast, merge_notes) = match merge(&plan) {
            Ok(m) => m,
            Err(e) => return run(Stage::Merge, inputs, vec![], StageStatus::Failed, vec![e.to_string()]),
        };
        let text = crate::pvs::print_theory(&ast).map_err(|e| PipelineError::failed(Stage::Merge, e))?;
        let parent = inputs[0].clone();
        let version_id = if TheoryVersion::id_for_text(&text) == parent {
            parent
        } else {
            self.store().put(&TheoryVersion::new(text, Origin::Merge, Some(parent), stmt_ids))?
        };
        let record = MergeRecord::new(inputs.clone(), &version_id, merge_notes.clone());
        let record_id = self.store().put(&record)?;
        let dedups = merge_notes.iter().filter(|n| matches!(n, MergeNote::Dedup { .. })).count();
        let mut notes = vec![format!("{} duplicate declaration(s) removed [{}]", dedups, record_id)];
        for n in &merge_notes {
            if let MergeNote::Rename { theory, from, to } = n {
                notes.push(format!("renamed {theory}.{from} to {to}"));
            }
        }
        run(Stage::Merge, inputs, vec![version_id], StageStatus::Ok, notes)
    }

    /// Newest version covering the merged statement set, which may be a
    /// human edit of the merge result.
    fn merge_target(&self) -> Result<String, PipelineError> {
        let merged = self.latest_run(Stage::Merge)?;
        let vid = merged
            .outputs
            .first()
            .ok_or_else(|| PipelineError::failed(Stage::Check, "the merge produced no theory"))?;
        let key = self.store().theory(vid)?.stmt_key();
        Ok(self.store().index()?.latest_version.get(&key).cloned().unwrap_or_else(|| vid.clone()))
    }

    pub(super) fn stage_check(&self) -> StageResult {
        let target = self.merge_target()?;
        let v = self.store().theory(&target)?;
        let result = match prover::check(&v.text, &self.config().prover, self.prelude()) {
            Ok(r) => r,
            Err(e @ ProverError::BackendUnavailable(_)) => return Err(PipelineError::failed(Stage::Check, e)),
            Err(e) => return run(Stage::Check, vec![target], vec![], StageStatus::Failed, vec![e.to_string()]),
        };
        let backend = match result.backend {
            BackendKind::Stub => "stub",
            BackendKind::Pvs => "pvs",
        };
        let mut notes = vec![format!(
            "{backend}: parse {}, typecheck {}",
            if result.parse_ok { "ok" } else { "failed" },
            if result.typecheck_ok { "ok" } else { "failed" }
        )];
        notes.extend(result.diagnostics.iter().filter(|d| d.is_error()).take(5).map(|d| d.to_string()));
        let status = if result.typecheck_ok { StageStatus::Ok } else { StageStatus::Failed };
        let id = self.store().put(&StoredCheck::new(&target, result))?;
        run(Stage::Check, vec![target], vec![id], status, notes)
    }

    pub(super) fn stage_prove(&self) -> StageResult {
        let target = self
            .latest_run(Stage::Check)?
            .inputs
            .first()
            .cloned()
            .ok_or_else(|| PipelineError::failed(Stage::Prove, "nothing was checked"))?;
        let v = self.store().theory(&target)?;
        let formulas = if self.config().prove_formulas.is_empty() {
            parse_theory(&v.text)
                .ast
                .map(|ast| {
                    ast.declarations
                        .iter()
                        .filter(|d| matches!(d.kind, DeclKind::Formula { class: FormulaClass::Theorem, .. }))
                        .map(|d| d.name.clone())
                        .collect()
                })
                .unwrap_or_default()
        } else {
            self.config().prove_formulas.clone()
        };
        if formulas.is_empty() {
            return run(Stage::Prove, vec![target], vec![], StageStatus::Failed, vec!["no theorem to prove".into()]);
        }
        let mut outputs = Vec::new();
        let mut notes = Vec::new();
        let mut all_ok = true;
        for f in &formulas {
            let config = &self.config().prover;
            let attempt = match prover::prove(&v.text, f, &self.config().tactic, config, self.prelude()) {
                Ok(a) => a,
                Err(e @ ProverError::BackendUnavailable(_)) => return Err(PipelineError::failed(Stage::Prove, e)),
                Err(e) => {
                    all_ok = false;
                    notes.push(format!("{f}: {e}"));
                    continue;
                }
            };
            all_ok &= matches!(attempt.status, ProofStatus::Proved | ProofStatus::SkippedStub);
            notes.push(format!("{f}: {}", serde_json::to_value(attempt.status).expect("serializes").as_str().unwrap_or("")));
            outputs.push(self.store().put(&StoredProof::new(&target, config.backend, attempt))?);
        }
        let status = if all_ok { StageStatus::Ok } else { StageStatus::Failed };
        run(Stage::Prove, vec![target], outputs, status, notes)
    }
}
