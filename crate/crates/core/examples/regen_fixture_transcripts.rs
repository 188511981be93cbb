//! Rebuild `fixtures/transcripts.ndjson` from the recorded responses.
//!
//! cargo run -p mathpvs-core --example regen_fixture_transcripts

use mathpvs_core::fixtures::{FixtureResponder, SUMMARY_TEX};
use mathpvs_core::llm::GatewayMode;
use mathpvs_core::pipeline::{Pipeline, PipelineConfig};
use mathpvs_core::store::{ProjectStore, Stage};
use std::sync::Arc;

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let store = ProjectStore::init(dir.path().join("regen"), "regen", serde_json::json!({}))?;
    let mut config = PipelineConfig::fixture();
    config.gateway.mode = GatewayMode::Record;
    config.bundled_transcripts = false;
    let pipeline = Pipeline::with_transport(store, config, Arc::new(FixtureResponder::new()))?;
    pipeline.ingest(SUMMARY_TEX.as_bytes(), None)?;
    pipeline.run_all(Some(Stage::Formalize))?;

    let transcripts = mathpvs_core::llm::TranscriptStore::new(pipeline.store().transcripts_dir());
    let mut lines = Vec::new();
    for hash in transcripts.list()? {
        let raw = transcripts.get_raw(&hash)?.expect("listed transcripts exist");
        lines.push(raw.trim_end().to_owned());
    }
    lines.sort();
    let out = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/transcripts.ndjson");
    std::fs::write(&out, lines.join("\n") + "\n")?;
    println!("wrote {} transcripts to {}", lines.len(), out.display());
    Ok(())
}
