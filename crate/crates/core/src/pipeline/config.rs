use super::PipelineError;
use crate::llm::GatewayConfig;
use crate::prover::ProverConfig;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// How an abstraction enters the formalization prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbstractionMode {
    /// Statement and abstraction are both given.
    Supplement,
    /// The abstraction stands in for the statement.
    Replace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub gateway: GatewayConfig,
    pub prover: ProverConfig,
    /// Concurrent model calls within a stage.
    pub parallelism: usize,
    /// Extra prelude renames for the repair stage, e.g. `set_theory -> sets`.
    pub rename_table: BTreeMap<String, String>,
    /// Merge collision renames keyed `Theory.decl`.
    pub merge_renames: BTreeMap<String, String>,
    pub template_dir: Option<PathBuf>,
    pub summarize: bool,
    pub abstraction: AbstractionMode,
    pub max_repair_passes: usize,
    pub require_merge_approval: bool,
    pub merged_theory_name: String,
    pub tactic: String,
    /// Formulas to prove; empty means every THEOREM of the merged theory.
    pub prove_formulas: Vec<String>,
    /// Fall back to the transcripts compiled into the binary.
    pub bundled_transcripts: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            gateway: GatewayConfig::default(),
            prover: ProverConfig::default(),
            parallelism: 4,
            rename_table: BTreeMap::new(),
            merge_renames: BTreeMap::new(),
            template_dir: None,
            summarize: false,
            abstraction: AbstractionMode::Supplement,
            max_repair_passes: crate::repair::DEFAULT_MAX_PASSES,
            require_merge_approval: true,
            merged_theory_name: "Merged".into(),
            tactic: "grind".into(),
            prove_formulas: Vec::new(),
            bundled_transcripts: true,
        }
    }
}

impl PipelineConfig {
    /// Settings for the bundled worked example.
    pub fn fixture() -> PipelineConfig {
        PipelineConfig {
            merged_theory_name: crate::fixtures::MERGED_THEORY_NAME.into(),
            ..PipelineConfig::default()
        }
    }

    pub fn load(path: &Path) -> Result<PipelineConfig, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    /// Read the configuration stored with a project; missing keys take
    /// their defaults.
    pub fn from_value(value: &serde_json::Value) -> Result<PipelineConfig, PipelineError> {
        if value.is_null() {
            return Ok(PipelineConfig::default());
        }
        serde_json::from_value(value.clone()).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Merge renames as the merge module expects them.
    pub fn merge_rename_map(&self) -> Result<BTreeMap<(String, String), String>, PipelineError> {
        self.merge_renames
            .iter()
            .map(|(k, v)| {
                let (theory, decl) = k
                    .split_once('.')
                    .ok_or_else(|| PipelineError::Config(format!("merge rename key `{k}` is not Theory.decl")))?;
                Ok(((theory.to_owned(), decl.to_owned()), v.clone()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_uses_defaults() {
        let c: PipelineConfig = serde_json::from_str(r#"{"gateway": {"mode": "record"}, "parallelism": 2}"#).unwrap();
        assert_eq!(c.parallelism, 2);
        assert_eq!(c.gateway.mode, crate::llm::GatewayMode::Record);
        assert_eq!(c.gateway.api_key_env, "OPENAI_API_KEY");
        assert_eq!(c.tactic, "grind");
        assert!(!c.to_json().to_string().contains("sk-"));
    }

    #[test]
    fn merge_rename_keys() {
        let mut c = PipelineConfig::default();
        c.merge_renames.insert("MainTheorem.h".into(), "embed".into());
        let m = c.merge_rename_map().unwrap();
        assert_eq!(m[&("MainTheorem".into(), "h".into())], "embed");
        c.merge_renames.insert("bad".into(), "x".into());
        assert!(c.merge_rename_map().is_err());
    }
}
