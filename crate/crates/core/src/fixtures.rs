//! The bundled worked example: a summary of effective symbolic spaces, the
//! recorded model responses for it, and the theories derived from it.

/// Four definitions and one theorem, as LaTeX.
pub const SUMMARY_TEX: &str = include_str!("../fixtures/summary.tex");
/// The same summary as OCR markdown.
pub const SUMMARY_MMD: &str = include_str!("../fixtures/summary.mmd");
/// Model output for the mapping definition, with three syntax defects.
pub const RAW_MAPPINGS: &str = include_str!("../fixtures/raw_mappings.pvs");
/// The merged theory after the human edit: the theorem strengthened to a
/// bijection and two helper lemmas added.
pub const FINAL_THEORY: &str = include_str!("../fixtures/final_theory.pvs");
pub const FINAL_THEORY_NOTE: &str =
    "Strengthen the main theorem from a surjective to a bijective mapping and add two lemmas used by its proof.";
pub const MERGED_THEORY_NAME: &str = "EffectiveSymbolicSpaces";
pub const MAIN_THEOREM: &str = "main";
/// Recorded transcripts, one canonical JSON object per line.
pub const TRANSCRIPTS: &str = include_str!("../fixtures/transcripts.ndjson");

/// `(request hash, transcript json)` pairs for every recorded transcript.
pub fn transcripts() -> Vec<(String, String)> {
    TRANSCRIPTS
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).expect("bundled transcripts are valid JSON");
            let hash = v["request_hash"].as_str().expect("transcripts carry their hash").to_owned();
            (hash, format!("{l}\n"))
        })
        .collect()
}

const ABSTRACT_RESPONSES: [&str; 5] = [
    include_str!("../fixtures/responses/abstract-1.txt"),
    include_str!("../fixtures/responses/abstract-2.txt"),
    include_str!("../fixtures/responses/abstract-3.txt"),
    include_str!("../fixtures/responses/abstract-4.txt"),
    include_str!("../fixtures/responses/abstract-5.txt"),
];

const FORMALIZE_RESPONSES: [&str; 5] = [
    include_str!("../fixtures/responses/formalize-1.txt"),
    include_str!("../fixtures/responses/formalize-2.txt"),
    include_str!("../fixtures/responses/formalize-3.txt"),
    include_str!("../fixtures/responses/formalize-4.txt"),
    include_str!("../fixtures/responses/formalize-5.txt"),
];

/// Offline stand-in for the model on the worked example. It recognises the
/// template by its system message and the statement by the body that ends
/// the user message, then answers with the recorded response.
pub struct FixtureResponder {
    bodies: Vec<String>,
}

impl FixtureResponder {
    pub fn new() -> FixtureResponder {
        let (_, stmts) = crate::ingest::ingest_bytes(SUMMARY_TEX.as_bytes(), None).expect("the summary parses");
        let bodies = stmts
            .into_iter()
            .map(|s| s.body_latex.trim().to_owned())
            .collect();
        FixtureResponder { bodies }
    }
}

impl Default for FixtureResponder {
    fn default() -> Self {
        FixtureResponder::new()
    }
}

impl crate::llm::Transport for FixtureResponder {
    fn send(&self, req: &crate::llm::ChatRequest) -> Result<crate::llm::ProviderReply, crate::llm::GatewayError> {
        use crate::llm::{GatewayError, Role};
        let text = |role| {
            req.messages
                .iter()
                .find(|m| m.role == role)
                .map(|m| m.content.trim_end())
                .unwrap_or_default()
        };
        let (system, user) = (text(Role::System), text(Role::User));
        let table = if system.starts_with("You are a research mathematician") {
            &ABSTRACT_RESPONSES
        } else if system.starts_with("You are an expert user of the PVS") {
            &FORMALIZE_RESPONSES
        } else {
            return Err(GatewayError::Transport("the worked example has no reply for this template".into()));
        };
        let i = self
            .bodies
            .iter()
            .position(|b| user.ends_with(b.as_str()))
            .ok_or_else(|| GatewayError::Transport("statement not part of the worked example".into()))?;
        let meta = std::collections::BTreeMap::from([("provider".to_owned(), serde_json::json!("fixture"))]);
        Ok(crate::llm::ProviderReply { text: table[i].to_owned(), meta })
    }
}
