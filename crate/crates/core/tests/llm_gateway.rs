use mathpvs_core::llm::{ChatMessage, ChatRequest, Gateway, GatewayConfig, GatewayError, GatewayMode, Role, TranscriptStore};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

/// One canned HTTP response per connection, in order. Returns the endpoint
/// and the raw requests seen so far.
fn serve(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    std::thread::spawn(move || {
        for (status, body) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut head = String::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let mut payload = vec![0; len];
            reader.read_exact(&mut payload).unwrap();
            head.push_str(&String::from_utf8(payload).unwrap());
            log.lock().unwrap().push(head);
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (format!("http://{addr}/v1/chat/completions"), seen)
}

fn ok_body(text: &str) -> String {
    serde_json::json!({"id": "c1", "model": "m", "choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

fn request() -> ChatRequest {
    ChatRequest::new("m", vec![ChatMessage { role: Role::User, content: "formalize".into() }])
}

fn gateway(endpoint: String, key_env: &str, dir: &std::path::Path) -> Gateway {
    let config = GatewayConfig {
        mode: GatewayMode::Record,
        endpoint,
        api_key_env: key_env.into(),
        max_retries: 2,
        backoff_base_ms: 1,
        timeout_secs: 5,
        ..GatewayConfig::default()
    };
    Gateway::http(config, TranscriptStore::new(dir)).unwrap()
}

#[test]
fn records_a_reply_and_sends_the_key_from_the_environment() {
    unsafe { std::env::set_var("MATHPVS_TEST_KEY_A", "sk-test-a") };
    let dir = tempfile::tempdir().unwrap();
    let (endpoint, seen) = serve(vec![(429, "{}".into()), (200, ok_body("X: THEORY BEGIN END X"))]);
    let gw = gateway(endpoint, "MATHPVS_TEST_KEY_A", dir.path());
    let t = gw.complete(&request(), GatewayMode::Record).unwrap();
    assert_eq!(t.response_text, "X: THEORY BEGIN END X");
    assert!(t.verify());
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 2, "one retry after the 429");
    assert!(seen[1].to_ascii_lowercase().contains("authorization: bearer sk-test-a"));
    assert!(seen[1].contains("\"model\":\"m\""));
    // The key never reaches the stored transcript.
    let stored = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    assert!(!std::fs::read_to_string(stored).unwrap().contains("sk-test-a"));
    let replayed = gw.complete(&request(), GatewayMode::Replay).unwrap();
    assert_eq!(replayed.response_text, t.response_text);
}

#[test]
fn server_errors_and_exhausted_rate_limits() {
    unsafe { std::env::set_var("MATHPVS_TEST_KEY_B", "sk-test-b") };
    let dir = tempfile::tempdir().unwrap();
    let (endpoint, _) = serve(vec![(500, "{\"error\":\"boom\"}".into())]);
    let gw = gateway(endpoint, "MATHPVS_TEST_KEY_B", dir.path());
    match gw.complete(&request(), GatewayMode::Live) {
        Err(GatewayError::ProviderError { status: 500, body }) => assert!(body.contains("boom")),
        other => panic!("{other:?}"),
    }

    let (endpoint, seen) = serve(vec![(429, "{}".into()), (429, "{}".into()), (429, "{}".into())]);
    let gw = gateway(endpoint, "MATHPVS_TEST_KEY_B", dir.path());
    assert_eq!(gw.complete(&request(), GatewayMode::Live).unwrap_err(), GatewayError::RateLimited { attempts: 3 });
    assert_eq!(seen.lock().unwrap().len(), 3);
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none(), "live mode stores nothing");
}

#[test]
fn missing_credential_is_refused_outside_replay() {
    let config = GatewayConfig {
        mode: GatewayMode::Live,
        api_key_env: "MATHPVS_TEST_KEY_UNSET".into(),
        ..GatewayConfig::default()
    };
    assert!(matches!(
        Gateway::http(config.clone(), TranscriptStore::read_only()),
        Err(GatewayError::MissingCredential(_))
    ));
    let replay = GatewayConfig { mode: GatewayMode::Replay, ..config };
    assert!(Gateway::http(replay, TranscriptStore::read_only()).is_ok());
}
