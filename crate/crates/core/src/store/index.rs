use super::artifact::{ArtifactKind, Origin, Stage};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Ingested,
    Extracted,
    Prompted,
    Generated,
    Repaired,
    Merged,
    Checked,
    Proved,
    HumanEdit,
    Verdict,
    StageRun,
}

impl EventKind {
    /// The event recorded when an artifact is stored.
    pub fn for_artifact(kind: ArtifactKind, origin: Option<Origin>) -> EventKind {
        match kind {
            ArtifactKind::Document => EventKind::Ingested,
            ArtifactKind::Statement | ArtifactKind::Graph => EventKind::Extracted,
            ArtifactKind::Transcript => EventKind::Prompted,
            ArtifactKind::Abstraction => EventKind::Generated,
            ArtifactKind::Theory => match origin {
                Some(Origin::Repair) => EventKind::Repaired,
                Some(Origin::Merge) => EventKind::Merged,
                Some(Origin::Human) => EventKind::HumanEdit,
                Some(Origin::Llm) | None => EventKind::Generated,
            },
            ArtifactKind::Check => EventKind::Checked,
            ArtifactKind::Proof => EventKind::Proved,
            ArtifactKind::Repair => EventKind::Repaired,
            ArtifactKind::Merge => EventKind::Merged,
            ArtifactKind::Verdict => EventKind::Verdict,
            ArtifactKind::Run => EventKind::StageRun,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub kind: EventKind,
    pub artifact: ArtifactKind,
    pub payload_ref: String,
    pub at: String,
}

/// Projection of the journal kept in `index.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Index {
    pub last_seq: u64,
    /// Stored ids per kind, in first-stored order.
    pub artifacts: BTreeMap<ArtifactKind, Vec<String>>,
    /// Statement-set key to the newest theory version covering it.
    pub latest_version: BTreeMap<String, String>,
    pub latest_check: BTreeMap<String, String>,
    pub latest_proof: BTreeMap<String, String>,
    pub latest_run: BTreeMap<Stage, String>,
    pub latest_verdict: BTreeMap<Stage, String>,
}

impl Index {
    pub fn ids(&self, kind: ArtifactKind) -> &[String] {
        self.artifacts.get(&kind).map(Vec::as_slice).unwrap_or_default()
    }

    /// Fold one event. `body` is the stored JSON of the referenced artifact.
    pub fn apply(&mut self, ev: &Event, body: &Value) {
        self.last_seq = ev.seq;
        let ids = self.artifacts.entry(ev.artifact).or_default();
        if !ids.contains(&ev.payload_ref) {
            ids.push(ev.payload_ref.clone());
        }
        let field = |name: &str| body.get(name).and_then(Value::as_str).map(str::to_owned);
        let stage = || body.get("stage").and_then(|v| serde_json::from_value::<Stage>(v.clone()).ok());
        match ev.artifact {
            ArtifactKind::Theory => {
                let mut stmts: Vec<String> = body
                    .get("stmt_ids")
                    .and_then(Value::as_array)
                    .map(|a| a.iter().filter_map(Value::as_str).map(str::to_owned).collect())
                    .unwrap_or_default();
                stmts.sort();
                self.latest_version.insert(stmts.join("+"), ev.payload_ref.clone());
            }
            ArtifactKind::Check => {
                if let Some(v) = field("version_id") {
                    self.latest_check.insert(v, ev.payload_ref.clone());
                }
            }
            ArtifactKind::Proof => {
                if let Some(v) = field("version_id") {
                    self.latest_proof.insert(v, ev.payload_ref.clone());
                }
            }
            ArtifactKind::Run => {
                if let Some(s) = stage() {
                    self.latest_run.insert(s, ev.payload_ref.clone());
                }
            }
            ArtifactKind::Verdict => {
                if let Some(s) = stage() {
                    self.latest_verdict.insert(s, ev.payload_ref.clone());
                }
            }
            _ => {}
        }
    }

    /// Names of the fields that differ from `other`.
    pub fn diff(&self, other: &Index) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.last_seq != other.last_seq {
            out.push("last_seq");
        }
        if self.artifacts != other.artifacts {
            out.push("artifacts");
        }
        if self.latest_version != other.latest_version {
            out.push("latest_version");
        }
        if self.latest_check != other.latest_check {
            out.push("latest_check");
        }
        if self.latest_proof != other.latest_proof {
            out.push("latest_proof");
        }
        if self.latest_run != other.latest_run {
            out.push("latest_run");
        }
        if self.latest_verdict != other.latest_verdict {
            out.push("latest_verdict");
        }
        out
    }
}
