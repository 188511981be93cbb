//! Core of the math-PVS workbench.
//!
//! Statements are extracted from LaTeX or OCR markdown ([`ingest`]), ordered
//! by their term dependencies ([`graph`]), turned into prompts ([`prompt`])
//! sent through a record/replay gateway ([`llm`]), and the returned PVS text
//! is parsed and linted ([`pvs`]), auto-repaired ([`repair`]), merged
//! ([`merge`]) and checked or proved ([`prover`]). Every artifact is kept in
//! an append-only project store ([`store`]); [`pipeline`] drives the stages.

pub mod canonical;
pub mod pvs;
pub mod repair;
pub mod ingest;
pub mod graph;
pub mod prompt;
pub mod llm;
pub mod merge;
pub mod prover;
pub mod store;
pub mod fixtures;
pub mod pipeline;
