//! Stored artifact types and their identities.

use crate::canonical::content_id;
use crate::graph::ConceptGraph;
use crate::ingest::{SourceDocument, StatementRecord};
use crate::llm::PromptTranscript;
use crate::merge::MergeNote;
use crate::prover::{CheckResult, ProofAttempt};
use crate::pvs::Diagnostic;
use crate::repair::RepairLog;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Document,
    Statement,
    Transcript,
    Theory,
    Check,
    Proof,
    Graph,
    Abstraction,
    Repair,
    Merge,
    Verdict,
    Run,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 12] = [
        ArtifactKind::Document,
        ArtifactKind::Statement,
        ArtifactKind::Transcript,
        ArtifactKind::Theory,
        ArtifactKind::Check,
        ArtifactKind::Proof,
        ArtifactKind::Graph,
        ArtifactKind::Abstraction,
        ArtifactKind::Repair,
        ArtifactKind::Merge,
        ArtifactKind::Verdict,
        ArtifactKind::Run,
    ];

    pub fn dir(self) -> &'static str {
        match self {
            ArtifactKind::Document => "documents",
            ArtifactKind::Statement => "statements",
            ArtifactKind::Transcript => "transcripts",
            ArtifactKind::Theory => "theories",
            ArtifactKind::Check => "checks",
            ArtifactKind::Proof => "proofs",
            ArtifactKind::Graph => "graphs",
            ArtifactKind::Abstraction => "abstractions",
            ArtifactKind::Repair => "repairs",
            ArtifactKind::Merge => "merges",
            ArtifactKind::Verdict => "verdicts",
            ArtifactKind::Run => "runs",
        }
    }

    /// File holding the JSON form of an artifact.
    pub fn file_name(self, id: &str) -> String {
        match self {
            ArtifactKind::Theory => format!("{id}.meta.json"),
            _ => format!("{id}.json"),
        }
    }
}

/// Keys that never take part in an artifact's identity.
const VOLATILE: &[&str] = &["created_at", "at", "duration_ms"];

fn strip_volatile(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|k, _| !VOLATILE.contains(&k.as_str()));
            map.values_mut().for_each(strip_volatile);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_volatile),
        _ => {}
    }
}

/// The JSON form without timestamps and durations.
pub fn identity_of<T: Serialize>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("artifacts serialize");
    strip_volatile(&mut v);
    v
}

pub trait Artifact: Serialize + DeserializeOwned {
    const KIND: ArtifactKind;

    fn id(&self) -> String;

    /// Type-level invariants; the message explains a violation.
    fn validate(&self) -> Result<(), String> {
        Ok(())
    }

    /// Text stored next to the JSON form rather than inside it.
    fn sidecar_text(&self) -> Option<&str> {
        None
    }
}

impl Artifact for SourceDocument {
    const KIND: ArtifactKind = ArtifactKind::Document;

    fn id(&self) -> String {
        self.doc_id.clone()
    }

    fn validate(&self) -> Result<(), String> {
        if self.raw_text.trim().is_empty() {
            return Err("document text is empty".into());
        }
        Ok(())
    }
}

impl Artifact for StatementRecord {
    const KIND: ArtifactKind = ArtifactKind::Statement;

    fn id(&self) -> String {
        self.stmt_id.clone()
    }

    fn validate(&self) -> Result<(), String> {
        if self.body_latex.trim().is_empty() {
            return Err(format!("statement {} has an empty body", self.stmt_id));
        }
        if self.source_span.0 > self.source_span.1 {
            return Err(format!("statement {} has an inverted span", self.stmt_id));
        }
        Ok(())
    }
}

impl Artifact for PromptTranscript {
    const KIND: ArtifactKind = ArtifactKind::Transcript;

    fn id(&self) -> String {
        self.request_hash.clone()
    }

    fn validate(&self) -> Result<(), String> {
        if !self.verify() {
            return Err(format!("transcript {} does not match its request", self.request_hash));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Llm,
    Repair,
    Merge,
    Human,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Llm => "llm",
            Origin::Repair => "repair",
            Origin::Merge => "merge",
            Origin::Human => "human",
        }
    }
}

/// One version of a theory. The text lives next to the metadata in
/// `theories/<version_id>.pvs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoryVersion {
    pub version_id: String,
    #[serde(default)]
    pub parent_id: Option<String>,
    pub origin: Origin,
    pub stmt_ids: Vec<String>,
    #[serde(skip)]
    pub text: String,
    pub theory_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub created_at: String,
}

impl TheoryVersion {
    pub fn id_for_text(text: &str) -> String {
        content_id("tv-", text)
    }

    pub fn new(text: impl Into<String>, origin: Origin, parent_id: Option<String>, stmt_ids: Vec<String>) -> Self {
        let text = text.into();
        let theory_name = crate::pvs::parse_theory(&text)
            .ast
            .map(|a| a.name)
            .unwrap_or_default();
        TheoryVersion {
            version_id: Self::id_for_text(&text),
            parent_id,
            origin,
            stmt_ids,
            text,
            theory_name,
            note: None,
            created_at: now(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Key of the statement set this version covers.
    pub fn stmt_key(&self) -> String {
        let mut ids = self.stmt_ids.clone();
        ids.sort();
        ids.join("+")
    }
}

impl Artifact for TheoryVersion {
    const KIND: ArtifactKind = ArtifactKind::Theory;

    fn id(&self) -> String {
        self.version_id.clone()
    }

    fn sidecar_text(&self) -> Option<&str> {
        Some(&self.text)
    }

    fn validate(&self) -> Result<(), String> {
        if self.version_id != Self::id_for_text(&self.text) {
            return Err(format!("version id {} does not match its text", self.version_id));
        }
        if self.origin == Origin::Human && self.note.as_deref().is_none_or(|n| n.trim().is_empty()) {
            return Err("a human edit needs an author note".into());
        }
        if self.origin != Origin::Llm && self.parent_id.is_none() {
            return Err(format!("an origin={} version needs a parent", self.origin.as_str()));
        }
        if self.parent_id.as_deref() == Some(self.version_id.as_str()) {
            return Err("a version cannot be its own parent".into());
        }
        Ok(())
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

macro_rules! identity_id {
    ($ty:ty, $kind:expr, $field:ident, $prefix:literal) => {
        impl $ty {
            /// Fill in the id from the identity of the other fields.
            pub fn sealed(mut self) -> Self {
                self.$field = String::new();
                self.$field = content_id($prefix, &identity_of(&self));
                self
            }
        }

        impl Artifact for $ty {
            const KIND: ArtifactKind = $kind;

            fn id(&self) -> String {
                self.$field.clone()
            }

            fn validate(&self) -> Result<(), String> {
                let mut probe = self.clone();
                probe.$field = String::new();
                if self.$field != content_id($prefix, &identity_of(&probe)) {
                    return Err(format!("{} does not match its content", self.$field));
                }
                self.check()
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredCheck {
    pub check_id: String,
    pub version_id: String,
    pub result: CheckResult,
}

impl StoredCheck {
    pub fn new(version_id: &str, result: CheckResult) -> Self {
        StoredCheck { check_id: String::new(), version_id: version_id.into(), result }.sealed()
    }

    fn check(&self) -> Result<(), String> {
        if self.result.typecheck_ok && !self.result.parse_ok {
            return Err("typecheck_ok without parse_ok".into());
        }
        Ok(())
    }
}
identity_id!(StoredCheck, ArtifactKind::Check, check_id, "ck-");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredProof {
    pub proof_id: String,
    pub version_id: String,
    pub backend: crate::prover::BackendKind,
    pub attempt: ProofAttempt,
}

impl StoredProof {
    pub fn new(version_id: &str, backend: crate::prover::BackendKind, attempt: ProofAttempt) -> Self {
        StoredProof { proof_id: String::new(), version_id: version_id.into(), backend, attempt }.sealed()
    }

    fn check(&self) -> Result<(), String> {
        use crate::prover::{BackendKind, ProofStatus};
        match (self.backend, self.attempt.status) {
            (BackendKind::Stub, ProofStatus::SkippedStub) => Ok(()),
            (BackendKind::Stub, _) => Err("the stub backend only yields skipped_stub".into()),
            (BackendKind::Pvs, ProofStatus::SkippedStub) => Err("skipped_stub requires the stub backend".into()),
            (BackendKind::Pvs, _) => Ok(()),
        }
    }
}
identity_id!(StoredProof, ArtifactKind::Proof, proof_id, "pf-");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredGraph {
    pub graph_id: String,
    pub doc_id: String,
    pub graph: ConceptGraph,
}

impl StoredGraph {
    pub fn new(doc_id: &str, graph: ConceptGraph) -> Self {
        StoredGraph { graph_id: String::new(), doc_id: doc_id.into(), graph }.sealed()
    }

    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}
identity_id!(StoredGraph, ArtifactKind::Graph, graph_id, "cg-");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abstraction {
    pub abstraction_id: String,
    pub stmt_id: String,
    pub transcript: String,
    pub text: String,
}

impl Abstraction {
    pub fn new(stmt_id: &str, transcript: &str, text: impl Into<String>) -> Self {
        Abstraction {
            abstraction_id: String::new(),
            stmt_id: stmt_id.into(),
            transcript: transcript.into(),
            text: text.into(),
        }
        .sealed()
    }

    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}
identity_id!(Abstraction, ArtifactKind::Abstraction, abstraction_id, "ab-");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairRecord {
    pub repair_id: String,
    pub from_version: String,
    /// Absent when no edit applied.
    pub to_version: Option<String>,
    pub ruleset_version: u32,
    pub log: RepairLog,
    pub remaining: Vec<Diagnostic>,
    pub passes: usize,
}

impl RepairRecord {
    pub fn new(from_version: &str, to_version: Option<String>, outcome: &crate::repair::RepairOutcome) -> Self {
        RepairRecord {
            repair_id: String::new(),
            from_version: from_version.into(),
            to_version,
            ruleset_version: crate::repair::RULESET_VERSION,
            log: outcome.log.clone(),
            remaining: outcome.remaining.clone(),
            passes: outcome.passes,
        }
        .sealed()
    }

    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}
identity_id!(RepairRecord, ArtifactKind::Repair, repair_id, "rp-");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub merge_id: String,
    pub members: Vec<String>,
    pub version_id: String,
    pub notes: Vec<MergeNote>,
}

impl MergeRecord {
    pub fn new(members: Vec<String>, version_id: &str, notes: Vec<MergeNote>) -> Self {
        MergeRecord { merge_id: String::new(), members, version_id: version_id.into(), notes }.sealed()
    }

    fn check(&self) -> Result<(), String> {
        if self.members.is_empty() {
            return Err("a merge needs members".into());
        }
        Ok(())
    }
}
identity_id!(MergeRecord, ArtifactKind::Merge, merge_id, "mg-");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Extract,
    Graph,
    Summarize,
    Abstract,
    Formalize,
    Repair,
    Merge,
    Check,
    Prove,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Ingest,
        Stage::Extract,
        Stage::Graph,
        Stage::Summarize,
        Stage::Abstract,
        Stage::Formalize,
        Stage::Repair,
        Stage::Merge,
        Stage::Check,
        Stage::Prove,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Extract => "extract",
            Stage::Graph => "graph",
            Stage::Summarize => "summarize",
            Stage::Abstract => "abstract",
            Stage::Formalize => "formalize",
            Stage::Repair => "repair",
            Stage::Merge => "merge",
            Stage::Check => "check",
            Stage::Prove => "prove",
        }
    }

    pub fn index(self) -> usize {
        Stage::ALL.iter().position(|s| *s == self).expect("listed")
    }

    pub fn upstream(self) -> &'static [Stage] {
        &Stage::ALL[..self.index()]
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    NeedsHuman,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRun {
    pub run_id: String,
    pub stage: Stage,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub status: StageStatus,
    pub notes: Vec<String>,
}

impl StageRun {
    pub fn new(stage: Stage, inputs: Vec<String>, outputs: Vec<String>, status: StageStatus, notes: Vec<String>) -> Self {
        StageRun { run_id: String::new(), stage, inputs, outputs, status, notes }.sealed()
    }

    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}
identity_id!(StageRun, ArtifactKind::Run, run_id, "run-");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Approve,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict_id: String,
    pub stage: Stage,
    /// The gated run this verdict answers.
    pub run_id: String,
    pub decision: Decision,
    pub note: String,
    pub created_at: String,
}

impl Verdict {
    pub fn new(stage: Stage, run_id: &str, decision: Decision, note: impl Into<String>) -> Self {
        Verdict {
            verdict_id: String::new(),
            stage,
            run_id: run_id.into(),
            decision,
            note: note.into(),
            created_at: now(),
        }
        .sealed()
    }

    fn check(&self) -> Result<(), String> {
        if self.note.trim().is_empty() {
            return Err("a verdict needs a note".into());
        }
        Ok(())
    }
}
identity_id!(Verdict, ArtifactKind::Verdict, verdict_id, "vd-");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_ignores_timestamps() {
        let mut a = Verdict::new(Stage::Repair, "run-1", Decision::Approve, "ok");
        let b = Verdict::new(Stage::Repair, "run-1", Decision::Approve, "ok");
        a.created_at = "2000-01-01T00:00:00Z".into();
        assert_eq!(identity_of(&a), identity_of(&b));
        assert!(a.validate().is_ok());
        let mut c = a.clone();
        c.note = "changed".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn theory_version_invariants() {
        let root = TheoryVersion::new("A: THEORY\nBEGIN\nEND A\n", Origin::Llm, None, vec!["s".into()]);
        assert!(root.validate().is_ok());
        assert_eq!(root.theory_name, "A");
        let human = TheoryVersion::new("B: THEORY\nBEGIN\nEND B\n", Origin::Human, Some(root.version_id.clone()), vec![]);
        assert!(human.validate().is_err());
        assert!(human.with_note("edited").validate().is_ok());
    }

    #[test]
    fn stages_are_ordered() {
        assert_eq!(Stage::Repair.upstream().last(), Some(&Stage::Formalize));
        assert_eq!("merge".parse::<Stage>(), Ok(Stage::Merge));
        assert!(Stage::Ingest.upstream().is_empty());
    }
}
