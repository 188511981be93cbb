//! Append-only project directory: content-addressed artifacts, an event
//! journal and an index projected from it.
//!
//! ```text
//! project.json  index.json  journal.ndjson  .lock
//! documents/ statements/ transcripts/ theories/ checks/ proofs/
//! graphs/ abstractions/ repairs/ merges/ verdicts/ runs/
//! ```

mod artifact;
pub mod fsio;
mod index;

pub use artifact::{
    identity_of, now, Abstraction, Artifact, ArtifactKind, Decision, MergeRecord, Origin, RepairRecord, Stage,
    StageRun, StageStatus, StoredCheck, StoredGraph, StoredProof, TheoryVersion, Verdict,
};
pub use index::{Event, EventKind, Index};

use crate::canonical::{to_canonical_line, to_canonical_string};
use fsio::{write_atomic, write_once, write_once_by, WriteOnce};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("no project at {0}")]
    ProjectNotFound(String),
    #[error("a project already exists at {0}")]
    ProjectExists(String),
    #[error("project is locked by another writer")]
    Locked,
    #[error("project handle is read-only")]
    ReadOnly,
    #[error("{kind:?} {id} already exists with different content")]
    ImmutableOverwrite { kind: ArtifactKind, id: String },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("unknown theory version {0}")]
    UnknownVersion(String),
    #[error("unknown {kind:?} {id}")]
    UnknownArtifact { kind: ArtifactKind, id: String },
    #[error("lineage of {0:?} contains a cycle")]
    CorruptLineage(Vec<String>),
    #[error("journal is missing event {0}")]
    JournalGap(u64),
    #[error("index does not match the journal: {0}")]
    ProjectionMismatch(String),
    #[error("corrupt file {path}: {message}")]
    Corrupt { path: String, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for StoreError {
    fn from(e: std::io::Error) -> Self {
        StoreError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, StoreError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub project_id: String,
    pub created_at: String,
    pub documents: Vec<String>,
    /// Configuration in effect when the project was created or last changed.
    #[serde(default)]
    pub config: Value,
}

const PROJECT: &str = "project.json";
const INDEX: &str = "index.json";
const JOURNAL: &str = "journal.ndjson";
const LOCK: &str = ".lock";

pub struct ProjectStore {
    root: PathBuf,
    /// Held while this handle may write.
    lock: Option<File>,
    /// Serializes puts through this handle so journal numbering stays gapless.
    put_guard: Mutex<()>,
}

impl std::fmt::Debug for ProjectStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjectStore")
            .field("root", &self.root)
            .field("writer", &self.lock.is_some())
            .finish()
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl ProjectStore {
    /// Create a new project directory and take the writer lock.
    pub fn init(root: impl Into<PathBuf>, project_id: &str, config: Value) -> Result<ProjectStore> {
        let root = root.into();
        if root.join(PROJECT).exists() {
            return Err(StoreError::ProjectExists(root.display().to_string()));
        }
        fs::create_dir_all(&root)?;
        let store = ProjectStore::lock_dir(root)?;
        for kind in ArtifactKind::ALL {
            fs::create_dir_all(store.root.join(kind.dir()))?;
        }
        let project = Project {
            project_id: project_id.to_owned(),
            created_at: now(),
            documents: Vec::new(),
            config,
        };
        write_atomic(&store.root.join(PROJECT), to_canonical_line(&project).as_bytes())?;
        write_atomic(&store.root.join(INDEX), to_canonical_line(&Index::default()).as_bytes())?;
        File::create(store.root.join(JOURNAL))?;
        Ok(store)
    }

    /// Read-only handle. Readers never take the lock.
    pub fn open(root: impl Into<PathBuf>) -> Result<ProjectStore> {
        let root = root.into();
        if !root.join(PROJECT).is_file() {
            return Err(StoreError::ProjectNotFound(root.display().to_string()));
        }
        Ok(ProjectStore { root, lock: None, put_guard: Mutex::new(()) })
    }

    /// Handle that may write; fails with `Locked` while another writer is open.
    pub fn open_writer(root: impl Into<PathBuf>) -> Result<ProjectStore> {
        let root = ProjectStore::open(root)?.root;
        ProjectStore::lock_dir(root)
    }

    fn lock_dir(root: PathBuf) -> Result<ProjectStore> {
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(root.join(LOCK))?;
        match file.try_lock() {
            Ok(()) => Ok(ProjectStore { root, lock: Some(file), put_guard: Mutex::new(()) }),
            Err(fs::TryLockError::WouldBlock) => Err(StoreError::Locked),
            Err(fs::TryLockError::Error(e)) => Err(e.into()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn is_writer(&self) -> bool {
        self.lock.is_some()
    }

    fn writer(&self) -> Result<()> {
        if self.lock.is_some() {
            Ok(())
        } else {
            Err(StoreError::ReadOnly)
        }
    }

    pub fn project(&self) -> Result<Project> {
        read_json(&self.root.join(PROJECT))
    }

    pub fn set_config(&self, config: Value) -> Result<()> {
        self.writer()?;
        let mut p = self.project()?;
        p.config = config;
        write_atomic(&self.root.join(PROJECT), to_canonical_line(&p).as_bytes())?;
        Ok(())
    }

    pub fn index(&self) -> Result<Index> {
        read_json(&self.root.join(INDEX))
    }

    pub fn transcripts_dir(&self) -> PathBuf {
        self.root.join(ArtifactKind::Transcript.dir())
    }

    fn artifact_path(&self, kind: ArtifactKind, id: &str) -> PathBuf {
        self.root.join(kind.dir()).join(kind.file_name(id))
    }

    /// Store an artifact and journal it. Returns its id. Storing an
    /// equivalent artifact again only adds an event.
    pub fn put<A: Artifact>(&self, artifact: &A) -> Result<String> {
        self.writer()?;
        let _guard = self.put_guard.lock().unwrap_or_else(|e| e.into_inner());
        let id = artifact.id();
        let kind = A::KIND;
        if let Some(text) = artifact.sidecar_text() {
            let existing = fs::read(self.root.join(kind.dir()).join(format!("{id}.pvs")));
            if existing.is_ok_and(|b| b != text.as_bytes()) {
                return Err(StoreError::ImmutableOverwrite { kind, id });
            }
        }
        artifact.validate().map_err(StoreError::InvariantViolation)?;
        let json = to_canonical_line(artifact);
        let mut origin = None;

        if kind == ArtifactKind::Theory {
            let meta: TheoryVersion = serde_json::from_str(&json).expect("round trip");
            origin = Some(meta.origin);
            if let Some(parent) = &meta.parent_id {
                if !self.artifact_path(kind, parent).is_file() {
                    return Err(StoreError::InvariantViolation(format!("parent version {parent} is not stored")));
                }
            }
            let text_path = self.root.join(kind.dir()).join(format!("{id}.pvs"));
            let body = artifact.sidecar_text().unwrap_or_default();
            if write_once(&text_path, body.as_bytes())? == WriteOnce::Conflict {
                return Err(StoreError::ImmutableOverwrite { kind, id });
            }
        }

        let identity = identity_of(artifact);
        let outcome = write_once_by(&self.artifact_path(kind, &id), json.as_bytes(), |existing| {
            serde_json::from_slice::<Value>(existing)
                .map(|mut v| {
                    strip(&mut v);
                    v == identity
                })
                .unwrap_or(false)
        })?;
        if outcome == WriteOnce::Conflict {
            return Err(StoreError::ImmutableOverwrite { kind, id });
        }
        if kind == ArtifactKind::Document {
            let mut p = self.project()?;
            if !p.documents.contains(&id) {
                p.documents.push(id.clone());
                write_atomic(&self.root.join(PROJECT), to_canonical_line(&p).as_bytes())?;
            }
        }
        self.append_event(EventKind::for_artifact(kind, origin), kind, &id)?;
        Ok(id)
    }

    fn append_event(&self, kind: EventKind, artifact: ArtifactKind, id: &str) -> Result<Event> {
        let mut index = self.index()?;
        let event = Event {
            seq: index.last_seq + 1,
            kind,
            artifact,
            payload_ref: id.to_owned(),
            at: now(),
        };
        let mut journal = OpenOptions::new().append(true).open(self.root.join(JOURNAL))?;
        journal.write_all(to_canonical_line(&event).as_bytes())?;
        journal.sync_data()?;
        let body = self.raw(artifact, id)?;
        index.apply(&event, &body);
        write_atomic(&self.root.join(INDEX), to_canonical_line(&index).as_bytes())?;
        Ok(event)
    }

    fn raw(&self, kind: ArtifactKind, id: &str) -> Result<Value> {
        let path = self.artifact_path(kind, id);
        if !path.is_file() {
            return Err(StoreError::UnknownArtifact { kind, id: id.to_owned() });
        }
        read_json(&path)
    }

    pub fn contains(&self, kind: ArtifactKind, id: &str) -> bool {
        self.artifact_path(kind, id).is_file()
    }

    pub fn get<A: Artifact>(&self, id: &str) -> Result<A> {
        let path = self.artifact_path(A::KIND, id);
        if !path.is_file() {
            return Err(match A::KIND {
                ArtifactKind::Theory => StoreError::UnknownVersion(id.to_owned()),
                kind => StoreError::UnknownArtifact { kind, id: id.to_owned() },
            });
        }
        read_json(&path)
    }

    /// Every stored artifact of one kind, in first-stored order.
    pub fn all<A: Artifact>(&self) -> Result<Vec<A>> {
        let index = self.index()?;
        if A::KIND == ArtifactKind::Theory {
            return Err(StoreError::InvariantViolation("use theories() for theory versions".into()));
        }
        index.ids(A::KIND).iter().map(|id| self.get(id)).collect()
    }

    pub fn theory(&self, version_id: &str) -> Result<TheoryVersion> {
        let mut v: TheoryVersion = self.get(version_id)?;
        let path = self.root.join(ArtifactKind::Theory.dir()).join(format!("{version_id}.pvs"));
        v.text = fs::read_to_string(&path).map_err(|e| match e.kind() {
            ErrorKind::NotFound => StoreError::UnknownVersion(version_id.to_owned()),
            _ => e.into(),
        })?;
        Ok(v)
    }

    pub fn theories(&self) -> Result<Vec<TheoryVersion>> {
        self.index()?
            .ids(ArtifactKind::Theory)
            .iter()
            .map(|id| self.theory(id))
            .collect()
    }

    /// Versions from the root to `version_id`, inclusive.
    pub fn lineage(&self, version_id: &str) -> Result<Vec<TheoryVersion>> {
        let mut chain = Vec::new();
        let mut seen = BTreeSet::new();
        let mut cursor = Some(version_id.to_owned());
        while let Some(id) = cursor {
            if !seen.insert(id.clone()) {
                let mut ids: Vec<String> = chain.iter().map(|v: &TheoryVersion| v.version_id.clone()).collect();
                ids.reverse();
                return Err(StoreError::CorruptLineage(ids));
            }
            let v = self.theory(&id)?;
            cursor = v.parent_id.clone();
            chain.push(v);
        }
        chain.reverse();
        Ok(chain)
    }

    pub fn journal(&self) -> Result<Vec<Event>> {
        let text = fs::read_to_string(self.root.join(JOURNAL))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str(l).map_err(|e| StoreError::Corrupt {
                    path: JOURNAL.into(),
                    message: e.to_string(),
                })
            })
            .collect()
    }

    /// Fold the journal and compare the result with `index.json`.
    pub fn replay_journal(&self) -> Result<Index> {
        let mut projected = Index::default();
        for (i, ev) in self.journal()?.iter().enumerate() {
            let expected = i as u64 + 1;
            if ev.seq != expected {
                return Err(StoreError::JournalGap(expected));
            }
            projected.apply(ev, &self.raw(ev.artifact, &ev.payload_ref)?);
        }
        let on_disk = self.index()?;
        let diff = projected.diff(&on_disk);
        if !diff.is_empty() {
            return Err(StoreError::ProjectionMismatch(format!("fields differ: {}", diff.join(", "))));
        }
        Ok(projected)
    }

    /// Number of artifact files, used to check that re-runs add nothing.
    pub fn artifact_count(&self) -> Result<usize> {
        let mut n = 0;
        for kind in ArtifactKind::ALL {
            match fs::read_dir(self.root.join(kind.dir())) {
                Ok(entries) => n += entries.filter_map(std::result::Result::ok).count(),
                Err(e) if e.kind() == ErrorKind::NotFound => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(n)
    }

    /// Canonical JSON of a stored artifact, as served over the API.
    pub fn raw_json(&self, kind: ArtifactKind, id: &str) -> Result<String> {
        Ok(to_canonical_string(&self.raw(kind, id)?))
    }
}

fn strip(v: &mut Value) {
    let stripped = identity_of(&*v);
    *v = stripped;
}
