use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::LazyLock;
use thiserror::Error;

const BUNDLED: &[(&str, &str)] = &[
    ("summarize.v1.txt", include_str!("../../templates/summarize.v1.txt")),
    ("abstract.v1.txt", include_str!("../../templates/abstract.v1.txt")),
    ("formalize.v1.txt", include_str!("../../templates/formalize.v1.txt")),
    ("repair-assist.v1.txt", include_str!("../../templates/repair-assist.v1.txt")),
];

pub const SUMMARIZE: &str = "summarize";
pub const ABSTRACT: &str = "abstract";
pub const FORMALIZE: &str = "formalize";
pub const REPAIR_ASSIST: &str = "repair-assist";

static PLACEHOLDER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\{\{([A-Za-z_][A-Za-z0-9_]*)\}\}").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub template_id: String,
    pub version: u32,
    /// The system message pattern.
    pub role_preamble: String,
    /// The user message pattern.
    pub body_pattern: String,
    pub required_placeholders: Vec<String>,
    pub optional_placeholders: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub template_id: String,
    pub version: u32,
    pub system: String,
    pub user: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("missing placeholder `{0}`")]
    MissingPlaceholder(String),
    #[error("unknown placeholder `{0}`")]
    UnknownPlaceholder(String),
    #[error("template {file}: {message}")]
    Malformed { file: String, message: String },
    #[error("no template `{0}`")]
    UnknownTemplate(String),
    #[error("template `{id}` version {version} is already registered with different content")]
    VersionConflict { id: String, version: u32 },
    #[error("reading templates: {0}")]
    Io(String),
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

impl PromptTemplate {
    /// Parse the front-matter file format:
    ///
    /// ```text
    /// ---
    /// template_id: abstract
    /// version: 1
    /// required: statement_body
    /// optional: context
    /// ---
    /// @@system
    /// ...
    /// @@user
    /// ...
    /// ```
    pub fn parse(file: &str, text: &str) -> Result<PromptTemplate, PromptError> {
        let bad = |message: &str| PromptError::Malformed {
            file: file.to_owned(),
            message: message.to_owned(),
        };
        let text = crate::canonical::normalize_newlines(text);
        let rest = text.strip_prefix("---\n").ok_or_else(|| bad("missing front matter"))?;
        let (front, body) = rest.split_once("\n---\n").ok_or_else(|| bad("unterminated front matter"))?;
        let mut fields = BTreeMap::new();
        for line in front.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(':').ok_or_else(|| bad("front matter lines are `key: value`"))?;
            fields.insert(k.trim(), v.trim());
        }
        let template_id = fields.get("template_id").ok_or_else(|| bad("template_id missing"))?.to_string();
        let version: u32 = fields
            .get("version")
            .and_then(|v| v.parse().ok())
            .filter(|&v| v >= 1)
            .ok_or_else(|| bad("version must be a positive integer"))?;
        let required = list(fields.get("required").copied().unwrap_or(""));
        let optional = list(fields.get("optional").copied().unwrap_or(""));

        let body = body.strip_prefix("@@system\n").ok_or_else(|| bad("expected @@system section"))?;
        let (system, user) = body.split_once("\n@@user\n").ok_or_else(|| bad("expected @@user section"))?;
        let t = PromptTemplate {
            template_id,
            version,
            role_preamble: system.to_owned(),
            body_pattern: user.trim_end_matches('\n').to_owned(),
            required_placeholders: required,
            optional_placeholders: optional,
        };
        let declared: BTreeSet<&str> = t.declared().collect();
        for name in t.used_placeholders() {
            if !declared.contains(name.as_str()) {
                return Err(bad(&format!("placeholder `{name}` is not declared")));
            }
        }
        Ok(t)
    }

    fn declared(&self) -> impl Iterator<Item = &str> {
        self.required_placeholders
            .iter()
            .chain(&self.optional_placeholders)
            .map(String::as_str)
    }

    pub fn used_placeholders(&self) -> BTreeSet<String> {
        PLACEHOLDER
            .captures_iter(&self.role_preamble)
            .chain(PLACEHOLDER.captures_iter(&self.body_pattern))
            .map(|c| c[1].to_owned())
            .collect()
    }

    /// Substitute `{{name}}` occurrences in one pass, so binding values are
    /// inserted verbatim even if they contain braces.
    pub fn render(&self, bindings: &BTreeMap<String, String>) -> Result<RenderedPrompt, PromptError> {
        for name in &self.required_placeholders {
            if !bindings.contains_key(name) {
                return Err(PromptError::MissingPlaceholder(name.clone()));
            }
        }
        let declared: BTreeSet<&str> = self.declared().collect();
        if let Some(extra) = bindings.keys().find(|k| !declared.contains(k.as_str())) {
            return Err(PromptError::UnknownPlaceholder(extra.clone()));
        }
        let fill = |pattern: &str| {
            PLACEHOLDER
                .replace_all(pattern, |c: &regex::Captures| {
                    bindings.get(&c[1]).cloned().unwrap_or_default()
                })
                .into_owned()
        };
        Ok(RenderedPrompt {
            template_id: self.template_id.clone(),
            version: self.version,
            system: fill(&self.role_preamble),
            user: fill(&self.body_pattern),
        })
    }
}

/// Templates keyed by (id, version). Registering a different text under an
/// existing key is refused.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateRegistry {
    templates: BTreeMap<(String, u32), PromptTemplate>,
}

impl TemplateRegistry {
    pub fn bundled() -> TemplateRegistry {
        let mut reg = TemplateRegistry::default();
        for (file, text) in BUNDLED {
            let t = PromptTemplate::parse(file, text).expect("bundled templates are well-formed");
            reg.register(t).expect("bundled templates are distinct");
        }
        reg
    }

    /// Bundled templates plus every `*.txt` file in `dir`.
    pub fn with_dir(dir: &Path) -> Result<TemplateRegistry, PromptError> {
        let mut reg = TemplateRegistry::bundled();
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| PromptError::Io(e.to_string()))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        for path in files {
            let text = std::fs::read_to_string(&path).map_err(|e| PromptError::Io(e.to_string()))?;
            reg.register(PromptTemplate::parse(&path.display().to_string(), &text)?)?;
        }
        Ok(reg)
    }

    pub fn register(&mut self, t: PromptTemplate) -> Result<(), PromptError> {
        let key = (t.template_id.clone(), t.version);
        match self.templates.get(&key) {
            Some(existing) if *existing != t => Err(PromptError::VersionConflict {
                id: key.0,
                version: key.1,
            }),
            _ => {
                self.templates.insert(key, t);
                Ok(())
            }
        }
    }

    pub fn get(&self, id: &str, version: u32) -> Option<&PromptTemplate> {
        self.templates.get(&(id.to_owned(), version))
    }

    /// Highest registered version of `id`.
    pub fn latest(&self, id: &str) -> Result<&PromptTemplate, PromptError> {
        self.templates
            .range((id.to_owned(), 0)..=(id.to_owned(), u32::MAX))
            .next_back()
            .map(|(_, t)| t)
            .ok_or_else(|| PromptError::UnknownTemplate(id.to_owned()))
    }

    pub fn ids(&self) -> BTreeSet<&str> {
        self.templates.keys().map(|(id, _)| id.as_str()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.values()
    }
}
