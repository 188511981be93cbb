//! Chat-completion access with live, record and replay modes.
//!
//! Every request is identified by a SHA-256 over its canonical JSON form.
//! Replay mode answers from stored transcripts only and never touches the
//! transport.

mod gateway;
mod store;
mod transport;

pub use gateway::{Gateway, GatewayConfig, GatewayMode};
pub use store::TranscriptStore;
pub use transport::{FailingTransport, HttpTransport, ProviderReply, ScriptedTransport, Transport};

use crate::canonical::{normalize_newlines, sha256_hex, to_canonical_string};
use crate::prompt::RenderedPrompt;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub model_id: String,
    #[serde(default)]
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn new(model_id: impl Into<String>, messages: Vec<ChatMessage>) -> ChatRequest {
        ChatRequest {
            messages,
            model_id: model_id.into(),
            temperature: 0.0,
            max_tokens: 4096,
        }
    }

    /// System and user messages from a rendered template.
    pub fn from_prompt(model_id: impl Into<String>, prompt: &RenderedPrompt) -> ChatRequest {
        let mut messages = Vec::new();
        if !prompt.system.trim().is_empty() {
            messages.push(ChatMessage {
                role: Role::System,
                content: prompt.system.clone(),
            });
        }
        messages.push(ChatMessage {
            role: Role::User,
            content: prompt.user.clone(),
        });
        ChatRequest::new(model_id, messages)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !self.messages.iter().any(|m| m.role == Role::User) {
            return Err(GatewayError::InvalidRequest("at least one user message is required".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {} is outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(GatewayError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }

    /// Canonical form: message contents with LF line endings.
    fn canonical(&self) -> ChatRequest {
        let mut c = self.clone();
        for m in &mut c.messages {
            m.content = normalize_newlines(&m.content);
        }
        c
    }
}

/// Hex SHA-256 of the canonical request JSON (sorted keys, LF line endings).
pub fn canonical_hash(req: &ChatRequest) -> String {
    sha256_hex(to_canonical_string(&req.canonical()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateRef {
    pub template_id: String,
    pub version: u32,
}

impl From<&RenderedPrompt> for TemplateRef {
    fn from(p: &RenderedPrompt) -> TemplateRef {
        TemplateRef {
            template_id: p.template_id.clone(),
            version: p.version,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTranscript {
    pub request_hash: String,
    pub request: ChatRequest,
    pub response_text: String,
    #[serde(default)]
    pub provider_meta: BTreeMap<String, Value>,
    pub created_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<TemplateRef>,
}

impl PromptTranscript {
    pub fn verify(&self) -> bool {
        canonical_hash(&self.request) == self.request_hash
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("provider returned {status}: {body}")]
    ProviderError { status: u16, body: String },
    #[error("request timed out after {0} s")]
    Timeout(u64),
    #[error("no recorded transcript for request {0}")]
    ReplayMiss(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("credential environment variable `{0}` is not set")]
    MissingCredential(String),
    #[error("a different transcript is already stored for {0}")]
    TranscriptConflict(String),
    #[error("transcript {0} does not match its request hash")]
    CorruptTranscript(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("transcript store: {0}")]
    Io(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(content: &str) -> ChatRequest {
        ChatRequest::new(
            "m",
            vec![ChatMessage {
                role: Role::User,
                content: content.into(),
            }],
        )
    }

    #[test]
    fn hash_normalizes_line_endings() {
        assert_eq!(canonical_hash(&req("a\r\nb")), canonical_hash(&req("a\nb")));
        assert_ne!(canonical_hash(&req("a b")), canonical_hash(&req("a\nb")));
    }

    #[test]
    fn hash_includes_temperature() {
        let mut warm = req("x");
        warm.temperature = 0.7;
        assert_ne!(canonical_hash(&warm), canonical_hash(&req("x")));
        assert_eq!(canonical_hash(&req("x")), canonical_hash(&req("x")));
        assert_eq!(canonical_hash(&req("x")).len(), 64);
    }

    #[test]
    fn validation() {
        assert!(req("x").validate().is_ok());
        let mut r = req("x");
        r.temperature = 2.5;
        assert!(r.validate().is_err());
        r.temperature = 0.0;
        r.messages[0].role = Role::System;
        assert!(r.validate().is_err());
    }
}
