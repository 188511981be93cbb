use super::{canonical_hash, ChatRequest, GatewayError, Role};
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderReply {
    pub text: String,
    pub meta: BTreeMap<String, Value>,
}

pub trait Transport: Send + Sync {
    fn send(&self, req: &ChatRequest) -> Result<ProviderReply, GatewayError>;
}

/// OpenAI-compatible chat-completions endpoint.
pub struct HttpTransport {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub headers: BTreeMap<String, String>,
}

const EXCERPT: usize = 512;

fn excerpt(body: &str) -> String {
    match body.char_indices().nth(EXCERPT) {
        Some((i, _)) => format!("{}...", &body[..i]),
        None => body.to_owned(),
    }
}

impl Transport for HttpTransport {
    fn send(&self, req: &ChatRequest) -> Result<ProviderReply, GatewayError> {
        let role = |r: Role| match r {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        };
        let payload = json!({
            "model": req.model_id,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
            "messages": req.messages.iter()
                .map(|m| json!({"role": role(m.role), "content": m.content}))
                .collect::<Vec<_>>(),
        });
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut call = agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        for (k, v) in &self.headers {
            call = call.header(k, v);
        }
        let mut resp = call.send(payload.to_string()).map_err(|e| match e {
            ureq::Error::Timeout(_) => GatewayError::Timeout(self.timeout.as_secs()),
            other => GatewayError::Transport(other.to_string()),
        })?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        if status == 429 {
            return Err(GatewayError::RateLimited { attempts: 1 });
        }
        if !(200..300).contains(&status) {
            return Err(GatewayError::ProviderError {
                status,
                body: excerpt(&body),
            });
        }
        let parsed: Value = serde_json::from_str(&body).map_err(|_| GatewayError::ProviderError {
            status,
            body: excerpt(&body),
        })?;
        let text = parsed
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| GatewayError::ProviderError {
                status,
                body: excerpt(&body),
            })?
            .to_owned();
        let mut meta = BTreeMap::new();
        for key in ["id", "model", "usage"] {
            if let Some(v) = parsed.get(key) {
                meta.insert(key.to_owned(), v.clone());
            }
        }
        meta.insert("status".into(), json!(status));
        Ok(ProviderReply { text, meta })
    }
}

/// Answers from a fixed table keyed by request hash. Unknown requests fail.
#[derive(Default)]
pub struct ScriptedTransport {
    replies: HashMap<String, String>,
    /// Errors to return before the scripted reply, consumed in order.
    failures: Mutex<Vec<GatewayError>>,
    calls: AtomicUsize,
}

impl ScriptedTransport {
    pub fn new() -> ScriptedTransport {
        ScriptedTransport::default()
    }

    pub fn reply(mut self, req: &ChatRequest, text: impl Into<String>) -> Self {
        self.replies.insert(canonical_hash(req), text.into());
        self
    }

    pub fn fail_first(self, errors: Vec<GatewayError>) -> Self {
        *self.failures.lock().unwrap() = errors;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for ScriptedTransport {
    fn send(&self, req: &ChatRequest) -> Result<ProviderReply, GatewayError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        {
            let mut failures = self.failures.lock().unwrap();
            if !failures.is_empty() {
                return Err(failures.remove(0));
            }
        }
        let hash = canonical_hash(req);
        let text = self
            .replies
            .get(&hash)
            .cloned()
            .ok_or_else(|| GatewayError::Transport(format!("no scripted reply for {hash}")))?;
        let meta = BTreeMap::from([("provider".to_owned(), json!("scripted"))]);
        Ok(ProviderReply { text, meta })
    }
}

/// Fails every call; used to prove that replay never reaches the network.
#[derive(Default)]
pub struct FailingTransport {
    calls: AtomicUsize,
}

impl FailingTransport {
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for FailingTransport {
    fn send(&self, _req: &ChatRequest) -> Result<ProviderReply, GatewayError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Err(GatewayError::Transport("network access is disabled".into()))
    }
}

impl<T: Transport + ?Sized> Transport for std::sync::Arc<T> {
    fn send(&self, req: &ChatRequest) -> Result<ProviderReply, GatewayError> {
        (**self).send(req)
    }
}
