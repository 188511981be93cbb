//! Index of commonly used PVS prelude names.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

const BUNDLED: &str = include_str!("../../data/prelude.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Theory,
    Type,
    Constant,
    Function,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreludeEntry {
    pub origin_theory: String,
    pub entry_kind: EntryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreludeIndex {
    pub entries: BTreeMap<String, PreludeEntry>,
    /// Known-wrong names and their prelude replacements.
    pub renames: BTreeMap<String, String>,
}

#[derive(Debug, Error)]
#[error("prelude index line {line}: {message}")]
pub struct PreludeError {
    pub line: usize,
    pub message: String,
}

impl PreludeIndex {
    /// The index shipped with the crate.
    pub fn bundled() -> PreludeIndex {
        PreludeIndex::parse(BUNDLED).expect("bundled prelude index is well-formed")
    }

    pub fn parse(text: &str) -> Result<PreludeIndex, PreludeError> {
        let mut index = PreludeIndex::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| PreludeError {
                line: n + 1,
                message: message.to_owned(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] == "rename" {
                let [_, from, to] = fields[..] else {
                    return Err(err("expected `rename <from> <to>`"));
                };
                index.renames.insert(from.to_owned(), to.to_owned());
                continue;
            }
            if fields.len() < 3 || fields.len() > 4 {
                return Err(err("expected `<name> <kind> <origin> [arity]`"));
            }
            let entry_kind = match fields[1] {
                "theory" => EntryKind::Theory,
                "type" => EntryKind::Type,
                "constant" => EntryKind::Constant,
                "function" => EntryKind::Function,
                _ => return Err(err("unknown entry kind")),
            };
            let arity = match fields.get(3) {
                Some(a) => Some(a.parse().map_err(|_| err("arity must be a number"))?),
                None => None,
            };
            index.entries.insert(
                fields[0].to_owned(),
                PreludeEntry {
                    origin_theory: fields[2].to_owned(),
                    entry_kind,
                    arity,
                },
            );
        }
        Ok(index)
    }

    pub fn get(&self, name: &str) -> Option<&PreludeEntry> {
        self.entries.get(name)
    }

    pub fn is_theory(&self, name: &str) -> bool {
        self.get(name).is_some_and(|e| e.entry_kind == EntryKind::Theory)
    }

    pub fn rename_for(&self, name: &str) -> Option<&str> {
        self.renames.get(name).map(String::as_str)
    }

    /// Add rename table entries, e.g. from configuration.
    pub fn with_renames<I, K, V>(mut self, extra: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        for (k, v) in extra {
            self.renames.insert(k.into(), v.into());
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_has_required_names() {
        let p = PreludeIndex::bundled();
        for name in ["sets", "booleans", "naturals", "functions"] {
            assert!(p.is_theory(name), "{name}");
        }
        for op in ["member", "subset?", "union", "intersection"] {
            assert_eq!(p.get(op).unwrap().origin_theory, "sets", "{op}");
        }
        assert!(p.get("set_theory").is_none());
        assert_eq!(p.rename_for("set_theory"), Some("sets"));
        assert!(p.entries.len() >= 40);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(PreludeIndex::parse("x widget sets").is_err());
        assert!(PreludeIndex::parse("rename a").is_err());
        assert!(PreludeIndex::parse("f function sets two").is_err());
    }
}
