//! Typechecking and proving through an external PVS installation, with a
//! stub backend built on the local front end.

mod process;
mod prooflite;

pub use prooflite::{format_tactic, write_prooflite};

use crate::pvs::{analyze, Diagnostic, LineIndex, PreludeIndex, Severity};
use process::{run_command, RunOutcome};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Stub,
    Pvs,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stub" => Ok(BackendKind::Stub),
            "pvs" => Ok(BackendKind::Pvs),
            other => Err(format!("unknown prover backend `{other}`")),
        }
    }
}

/// Regexes used to classify batch output. `{formula}` in the proof patterns
/// is replaced by the escaped formula name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPatterns {
    pub typechecked: String,
    pub parse_error: String,
    /// Must define `line` and `col` groups and may define `msg`.
    pub error_line: String,
    pub proved: String,
    pub unfinished: String,
}

impl Default for OutputPatterns {
    fn default() -> Self {
        OutputPatterns {
            typechecked: r"(?i)\btypechecked\b|\bno errors\b".into(),
            parse_error: r"(?i)\b(?:parse|parser|syntax) error\b".into(),
            error_line: r"(?m)^(?:[^:\n]*\.pvs):(?P<line>\d+):(?P<col>\d+):?\s*(?P<msg>.*)$".into(),
            proved: r"(?m)^\s*{formula}\b[ .]*proved\b".into(),
            unfinished: r"(?m)^\s*{formula}\b[ .]*(?:unfinished|untried|unchecked|failed)\b".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProverConfig {
    pub backend: BackendKind,
    /// Whitespace-separated command with `{file}`, `{theory}`, `{dir}` placeholders.
    pub check_command: String,
    pub prove_command: String,
    pub check_timeout_secs: u64,
    pub proof_timeout_secs: u64,
    pub output_cap_bytes: usize,
    pub patterns: OutputPatterns,
    /// Environment variable naming the PVS installation directory.
    pub pvs_home_env: String,
    /// Optional file receiving the full, untruncated output of each run.
    pub full_log: Option<PathBuf>,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            backend: BackendKind::Stub,
            check_command: "proveit --typecheck {file}".into(),
            prove_command: "proveit --scripts --force {file}".into(),
            check_timeout_secs: 120,
            proof_timeout_secs: 300,
            output_cap_bytes: 64 * 1024,
            patterns: OutputPatterns::default(),
            pvs_home_env: "PVS_DIR".into(),
            full_log: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub backend: BackendKind,
    pub parse_ok: bool,
    pub typecheck_ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub raw_output: String,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofStatus {
    Proved,
    Unfinished,
    Error,
    Timeout,
    SkippedStub,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofAttempt {
    pub formula_name: String,
    pub tactic_script: String,
    pub status: ProofStatus,
    pub duration_ms: u64,
    pub output_excerpt: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProverError {
    #[error("prover backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("prover timed out after {0} s")]
    Timeout(u64),
    #[error("could not classify prover output")]
    OutputUnparseable { raw_output: String },
    #[error("`{0}` is not a formula of the theory")]
    UnknownFormula(String),
    #[error("theory does not typecheck")]
    NotTypechecked,
    #[error("invalid output pattern: {0}")]
    BadPattern(String),
    #[error("workspace: {0}")]
    Io(String),
}

/// Cut to at most `cap` bytes on a character boundary.
pub(crate) fn truncate(text: &str, cap: usize) -> String {
    if text.len() <= cap {
        return text.to_owned();
    }
    let mut end = cap;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    text[..end].to_owned()
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

fn compile(pattern: &str, formula: Option<&str>) -> Result<Regex, ProverError> {
    let pattern = match formula {
        Some(f) => pattern.replace("{formula}", &regex::escape(f)),
        None => pattern.to_owned(),
    };
    Regex::new(&pattern).map_err(|e| ProverError::BadPattern(e.to_string()))
}

pub fn check(theory_text: &str, config: &ProverConfig, prelude: &PreludeIndex) -> Result<CheckResult, ProverError> {
    match config.backend {
        BackendKind::Stub => Ok(check_stub(theory_text, prelude)),
        BackendKind::Pvs => check_pvs(theory_text, config),
    }
}

pub fn check_stub(theory_text: &str, prelude: &PreludeIndex) -> CheckResult {
    let start = Instant::now();
    let (ast, diagnostics) = analyze(theory_text, prelude);
    let parse_ok = ast.is_some();
    let typecheck_ok = parse_ok && !diagnostics.iter().any(Diagnostic::is_error);
    let raw_output = diagnostics.iter().map(|d| format!("{d}\n")).collect();
    CheckResult {
        backend: BackendKind::Stub,
        parse_ok,
        typecheck_ok,
        diagnostics,
        raw_output,
        duration_ms: elapsed_ms(start),
    }
}

/// Theory name for the file on disk; falls back to a neutral name when the
/// text does not parse far enough to tell.
fn theory_name(text: &str) -> String {
    crate::pvs::parse_theory(text)
        .ast
        .map(|a| a.name)
        .filter(|n| !n.is_empty())
        .unwrap_or_else(|| "theory".into())
}

fn check_pvs(theory_text: &str, config: &ProverConfig) -> Result<CheckResult, ProverError> {
    let start = Instant::now();
    let name = theory_name(theory_text);
    let outcome = run_command(
        &config.check_command,
        &name,
        theory_text,
        config,
        Duration::from_secs(config.check_timeout_secs),
    )?;
    let RunOutcome { output, timed_out, .. } = outcome;
    if timed_out {
        return Err(ProverError::Timeout(config.check_timeout_secs));
    }
    let raw_output = truncate(&output, config.output_cap_bytes);
    let p = &config.patterns;
    let error_re = compile(&p.error_line, None)?;
    let lines = LineIndex::new(theory_text);
    let line_starts: Vec<usize> = std::iter::once(0)
        .chain(theory_text.match_indices('\n').map(|(i, _)| i + 1))
        .collect();
    let mut diagnostics = Vec::new();
    for caps in error_re.captures_iter(&output) {
        let line: usize = caps.name("line").and_then(|m| m.as_str().parse().ok()).unwrap_or(1);
        let col: usize = caps.name("col").and_then(|m| m.as_str().parse().ok()).unwrap_or(1);
        let base = line_starts.get(line.saturating_sub(1)).copied().unwrap_or(theory_text.len());
        let offset = (base + col.saturating_sub(1)).min(theory_text.len());
        let msg = caps.name("msg").map(|m| m.as_str().trim()).unwrap_or("error reported by PVS");
        diagnostics.push(Diagnostic::error(crate::pvs::codes::E_PVS, lines.span(offset, offset), msg));
    }
    let parse_failed = compile(&p.parse_error, None)?.is_match(&output);
    let typechecked = compile(&p.typechecked, None)?.is_match(&output);
    if !typechecked && !parse_failed && diagnostics.is_empty() {
        return Err(ProverError::OutputUnparseable { raw_output });
    }
    let parse_ok = !parse_failed;
    let typecheck_ok = parse_ok && typechecked && diagnostics.iter().all(|d| d.severity != Severity::Error);
    Ok(CheckResult {
        backend: BackendKind::Pvs,
        parse_ok,
        typecheck_ok,
        diagnostics,
        raw_output,
        duration_ms: elapsed_ms(start),
    })
}

pub fn prove(
    theory_text: &str,
    formula_name: &str,
    tactic: &str,
    config: &ProverConfig,
    prelude: &PreludeIndex,
) -> Result<ProofAttempt, ProverError> {
    let start = Instant::now();
    let tactic_script = format_tactic(tactic);
    let ast = crate::pvs::parse_theory(theory_text).ast.ok_or(ProverError::NotTypechecked)?;
    let script = write_prooflite(&ast, formula_name, tactic)?;
    if config.backend == BackendKind::Stub {
        if !check_stub(theory_text, prelude).typecheck_ok {
            return Err(ProverError::NotTypechecked);
        }
        return Ok(ProofAttempt {
            formula_name: formula_name.to_owned(),
            tactic_script,
            status: ProofStatus::SkippedStub,
            duration_ms: elapsed_ms(start),
            output_excerpt: String::new(),
        });
    }
    let outcome = run_command(
        &config.prove_command,
        &ast.name,
        &script,
        config,
        Duration::from_secs(config.proof_timeout_secs),
    )?;
    let output_excerpt = truncate(&outcome.output, config.output_cap_bytes);
    let status = if outcome.timed_out {
        ProofStatus::Timeout
    } else if compile(&config.patterns.proved, Some(formula_name))?.is_match(&outcome.output) {
        ProofStatus::Proved
    } else if compile(&config.patterns.unfinished, Some(formula_name))?.is_match(&outcome.output) {
        ProofStatus::Unfinished
    } else {
        ProofStatus::Error
    };
    Ok(ProofAttempt {
        formula_name: formula_name.to_owned(),
        tactic_script,
        status,
        duration_ms: elapsed_ms(start),
        output_excerpt,
    })
}
