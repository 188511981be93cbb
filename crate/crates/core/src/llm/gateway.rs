use super::{
    canonical_hash, ChatRequest, GatewayError, HttpTransport, PromptTranscript, TemplateRef, TranscriptStore, Transport,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GatewayMode {
    Live,
    Record,
    Replay,
}

impl std::str::FromStr for GatewayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(GatewayMode::Live),
            "record" => Ok(GatewayMode::Record),
            "replay" => Ok(GatewayMode::Replay),
            other => Err(format!("unknown gateway mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewayConfig {
    pub mode: GatewayMode,
    pub endpoint: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub temperature: f64,
    pub max_tokens: u32,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub headers: BTreeMap<String, String>,
    /// Extra read-only directories searched for transcripts.
    pub transcript_dirs: Vec<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            mode: GatewayMode::Replay,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model_id: "gpt-4".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 120,
            temperature: 0.0,
            max_tokens: 4096,
            max_retries: 4,
            backoff_base_ms: 500,
            headers: BTreeMap::new(),
            transcript_dirs: Vec::new(),
        }
    }
}

pub struct Gateway {
    config: GatewayConfig,
    transport: Arc<dyn Transport>,
    store: TranscriptStore,
}

impl Gateway {
    pub fn new(config: GatewayConfig, transport: Arc<dyn Transport>, store: TranscriptStore) -> Gateway {
        let store = config
            .transcript_dirs
            .iter()
            .fold(store, |s, d| s.with_lookup_dir(d.clone()));
        Gateway {
            config,
            transport,
            store,
        }
    }

    /// HTTP transport built from the config. The key is read from the
    /// environment now; it is only required for live and record modes.
    pub fn http(config: GatewayConfig, store: TranscriptStore) -> Result<Gateway, GatewayError> {
        let api_key = std::env::var(&config.api_key_env).ok();
        if api_key.is_none() && config.mode != GatewayMode::Replay {
            return Err(GatewayError::MissingCredential(config.api_key_env.clone()));
        }
        let transport = HttpTransport {
            endpoint: config.endpoint.clone(),
            api_key,
            timeout: Duration::from_secs(config.timeout_secs),
            headers: config.headers.clone(),
        };
        Ok(Gateway::new(config, Arc::new(transport), store))
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn store(&self) -> &TranscriptStore {
        &self.store
    }

    /// A request with the configured model and sampling settings.
    pub fn request_for(&self, prompt: &crate::prompt::RenderedPrompt) -> ChatRequest {
        let mut req = ChatRequest::from_prompt(&self.config.model_id, prompt);
        req.temperature = self.config.temperature;
        req.max_tokens = self.config.max_tokens;
        req
    }

    pub fn complete(&self, req: &ChatRequest, mode: GatewayMode) -> Result<PromptTranscript, GatewayError> {
        self.complete_with(req, mode, None)
    }

    /// Complete with the configured mode, tagging the transcript with the
    /// template that produced the prompt.
    pub fn complete_prompt(&self, prompt: &crate::prompt::RenderedPrompt) -> Result<PromptTranscript, GatewayError> {
        let req = self.request_for(prompt);
        self.complete_with(&req, self.config.mode, Some(TemplateRef::from(prompt)))
    }

    pub fn complete_with(
        &self,
        req: &ChatRequest,
        mode: GatewayMode,
        template: Option<TemplateRef>,
    ) -> Result<PromptTranscript, GatewayError> {
        req.validate()?;
        let hash = canonical_hash(req);
        if mode == GatewayMode::Replay {
            return self.store.get(&hash)?.ok_or(GatewayError::ReplayMiss(hash));
        }
        let reply = self.send_with_retry(req)?;
        let transcript = PromptTranscript {
            request_hash: hash,
            request: req.clone(),
            response_text: reply.text,
            provider_meta: reply.meta,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            template,
        };
        if mode == GatewayMode::Record {
            self.store.put(&transcript)?;
        }
        Ok(transcript)
    }

    fn send_with_retry(&self, req: &ChatRequest) -> Result<super::ProviderReply, GatewayError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.transport.send(req) {
                Err(GatewayError::RateLimited { .. }) if attempt <= self.config.max_retries => {
                    let wait = self.config.backoff_base_ms.saturating_mul(1 << (attempt - 1).min(16));
                    log::warn!("rate limited, retrying in {wait} ms (attempt {attempt})");
                    std::thread::sleep(Duration::from_millis(wait));
                }
                Err(GatewayError::RateLimited { .. }) => {
                    return Err(GatewayError::RateLimited { attempts: attempt });
                }
                other => return other,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{ChatMessage, FailingTransport, Role, ScriptedTransport};

    fn req(content: &str) -> ChatRequest {
        ChatRequest::new(
            "m",
            vec![ChatMessage {
                role: Role::User,
                content: content.into(),
            }],
        )
    }

    fn config() -> GatewayConfig {
        GatewayConfig {
            backoff_base_ms: 0,
            max_retries: 2,
            ..GatewayConfig::default()
        }
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let r = req("formalize this");
        let scripted = Arc::new(ScriptedTransport::new().reply(&r, "```pvs\nA: THEORY\nBEGIN\nEND A\n```"));
        let gw = Gateway::new(config(), scripted.clone(), TranscriptStore::new(dir.path()));
        let recorded = gw.complete(&r, GatewayMode::Record).unwrap();
        assert_eq!(scripted.calls(), 1);

        let failing = Arc::new(FailingTransport::default());
        let offline = Gateway::new(config(), failing.clone(), TranscriptStore::new(dir.path()));
        let replayed = offline.complete(&r, GatewayMode::Replay).unwrap();
        assert_eq!(replayed, recorded);
        assert_eq!(failing.calls(), 0);
        let raw = std::fs::read_to_string(dir.path().join(format!("{}.json", recorded.request_hash))).unwrap();
        assert_eq!(crate::canonical::to_canonical_line(&replayed), raw);
    }

    #[test]
    fn replay_miss() {
        let gw = Gateway::new(config(), Arc::new(FailingTransport::default()), TranscriptStore::read_only());
        assert!(matches!(gw.complete(&req("x"), GatewayMode::Replay), Err(GatewayError::ReplayMiss(_))));
    }

    #[test]
    fn live_does_not_persist() {
        let dir = tempfile::tempdir().unwrap();
        let r = req("x");
        let gw = Gateway::new(config(), Arc::new(ScriptedTransport::new().reply(&r, "y")), TranscriptStore::new(dir.path()));
        assert_eq!(gw.complete(&r, GatewayMode::Live).unwrap().response_text, "y");
        assert!(gw.store().list().unwrap().is_empty());
    }

    #[test]
    fn rate_limit_retries_then_surfaces() {
        let r = req("x");
        let limited = || GatewayError::RateLimited { attempts: 1 };
        let t = Arc::new(ScriptedTransport::new().reply(&r, "ok").fail_first(vec![limited(), limited()]));
        let gw = Gateway::new(config(), t.clone(), TranscriptStore::read_only());
        assert_eq!(gw.complete(&r, GatewayMode::Live).unwrap().response_text, "ok");
        assert_eq!(t.calls(), 3);

        let t = Arc::new(ScriptedTransport::new().reply(&r, "ok").fail_first(vec![limited(), limited(), limited()]));
        let gw = Gateway::new(config(), t, TranscriptStore::read_only());
        assert_eq!(gw.complete(&r, GatewayMode::Live), Err(GatewayError::RateLimited { attempts: 3 }));
    }

    #[test]
    fn conflicting_record_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let r = req("x");
        let gw = Gateway::new(config(), Arc::new(ScriptedTransport::new().reply(&r, "a")), TranscriptStore::new(dir.path()));
        gw.complete(&r, GatewayMode::Record).unwrap();
        let gw = Gateway::new(config(), Arc::new(ScriptedTransport::new().reply(&r, "b")), TranscriptStore::new(dir.path()));
        assert!(matches!(gw.complete(&r, GatewayMode::Record), Err(GatewayError::TranscriptConflict(_))));
    }

    #[test]
    fn provider_error_passes_through() {
        let r = req("x");
        let t = ScriptedTransport::new().fail_first(vec![GatewayError::ProviderError {
            status: 500,
            body: "boom".into(),
        }]);
        let gw = Gateway::new(config(), Arc::new(t), TranscriptStore::read_only());
        assert!(matches!(gw.complete(&r, GatewayMode::Live), Err(GatewayError::ProviderError { status: 500, .. })));
    }
}
