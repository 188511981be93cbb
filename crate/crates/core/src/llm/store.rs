use super::{GatewayError, PromptTranscript};
use crate::canonical::to_canonical_line;
use std::collections::BTreeMap;
use std::fs;
use std::io::ErrorKind;
use crate::store::fsio::{write_once, WriteOnce};
use std::path::{Path, PathBuf};

/// Content-addressed transcript files, `<hash>.json`, written once.
///
/// Lookups fall back to read-only directories and then to an in-memory set
/// (used for the transcripts compiled into the crate).
#[derive(Debug, Clone, Default)]
pub struct TranscriptStore {
    dir: Option<PathBuf>,
    read_only: Vec<PathBuf>,
    embedded: BTreeMap<String, String>,
}

impl TranscriptStore {
    pub fn new(dir: impl Into<PathBuf>) -> TranscriptStore {
        TranscriptStore {
            dir: Some(dir.into()),
            ..Default::default()
        }
    }

    /// A store that can only be read.
    pub fn read_only() -> TranscriptStore {
        TranscriptStore::default()
    }

    pub fn with_lookup_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.read_only.push(dir.into());
        self
    }

    pub fn with_embedded<'a>(mut self, files: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        for (hash, text) in files {
            self.embedded.insert(hash.to_owned(), text.to_owned());
        }
        self
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn file_name(hash: &str) -> String {
        format!("{hash}.json")
    }

    /// Raw stored bytes for `hash`, if any source has it.
    pub fn get_raw(&self, hash: &str) -> Result<Option<String>, GatewayError> {
        let name = Self::file_name(hash);
        for dir in self.dir.iter().chain(&self.read_only) {
            match fs::read_to_string(dir.join(&name)) {
                Ok(text) => return Ok(Some(text)),
                Err(e) if e.kind() == ErrorKind::NotFound => {}
                Err(e) => return Err(GatewayError::Io(e.to_string())),
            }
        }
        Ok(self.embedded.get(hash).cloned())
    }

    pub fn get(&self, hash: &str) -> Result<Option<PromptTranscript>, GatewayError> {
        let Some(raw) = self.get_raw(hash)? else {
            return Ok(None);
        };
        let t: PromptTranscript =
            serde_json::from_str(&raw).map_err(|_| GatewayError::CorruptTranscript(hash.to_owned()))?;
        if t.request_hash != hash || !t.verify() {
            return Err(GatewayError::CorruptTranscript(hash.to_owned()));
        }
        Ok(Some(t))
    }

    /// Persist a transcript. Returns false when an identical file existed.
    pub fn put(&self, t: &PromptTranscript) -> Result<bool, GatewayError> {
        if !t.verify() {
            return Err(GatewayError::CorruptTranscript(t.request_hash.clone()));
        }
        let dir = self
            .dir
            .as_ref()
            .ok_or_else(|| GatewayError::Io("transcript store is read-only".into()))?;
        let path = dir.join(Self::file_name(&t.request_hash));
        match write_once(&path, to_canonical_line(t).as_bytes()) {
            Ok(WriteOnce::Created) => Ok(true),
            Ok(WriteOnce::Existing) => Ok(false),
            Ok(WriteOnce::Conflict) => Err(GatewayError::TranscriptConflict(t.request_hash.clone())),
            Err(e) => Err(GatewayError::Io(e.to_string())),
        }
    }

    /// Hashes available in the writable directory.
    pub fn list(&self) -> Result<Vec<String>, GatewayError> {
        let Some(dir) = &self.dir else {
            return Ok(Vec::new());
        };
        let entries = match fs::read_dir(dir) {
            Ok(e) => e,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(GatewayError::Io(e.to_string())),
        };
        let mut out: Vec<String> = entries
            .filter_map(Result::ok)
            .filter_map(|e| e.file_name().to_str()?.strip_suffix(".json").map(str::to_owned))
            .collect();
        out.sort();
        Ok(out)
    }
}
