//! Document loading and statement extraction.

mod document;
mod extract;
mod normalize;

pub use document::{detect_format, load_document, DocFormat, IngestError, SourceDocument};
pub use extract::{extract_statements, normalize_term, StatementKind, StatementRecord};
pub use normalize::{normalize_delimiters, normalize_markup};

/// Load, normalize and extract in one step.
pub fn ingest_bytes(
    bytes: &[u8],
    format_hint: Option<DocFormat>,
) -> Result<(SourceDocument, Vec<StatementRecord>), IngestError> {
    let doc = normalize_markup(&load_document(bytes, format_hint)?);
    let stmts = extract_statements(&doc);
    Ok((doc, stmts))
}
