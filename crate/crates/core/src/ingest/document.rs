use crate::canonical::{content_id, normalize_newlines};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocFormat {
    Latex,
    NougatMarkdown,
}

impl DocFormat {
    /// Guess from a file extension: `.tex` or `.mmd`/`.md`.
    pub fn from_extension(ext: &str) -> Option<DocFormat> {
        match ext.to_ascii_lowercase().as_str() {
            "tex" | "latex" => Some(DocFormat::Latex),
            "mmd" | "md" | "markdown" => Some(DocFormat::NougatMarkdown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub doc_id: String,
    pub format: DocFormat,
    pub raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    /// Byte ranges of the top-level blocks.
    pub spans: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IngestError {
    #[error("document is not valid UTF-8 (first bad byte at {0})")]
    DecodeError(usize),
    #[error("document has no content")]
    EmptyDocument,
}

static BEGIN_END: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\\(begin|end)\{([A-Za-z]+\*?)\}").unwrap());
static LATEX_TITLE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\\title\{([^}]*)\}").unwrap());
static MD_HEADING: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^#{1,6}[ \t]+(.*)$").unwrap());

pub fn detect_format(text: &str) -> DocFormat {
    if text.contains("\\documentclass") || text.contains("\\begin{document}") {
        DocFormat::Latex
    } else {
        DocFormat::NougatMarkdown
    }
}

pub fn load_document(bytes: &[u8], format_hint: Option<DocFormat>) -> Result<SourceDocument, IngestError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let text = std::str::from_utf8(bytes).map_err(|e| IngestError::DecodeError(e.valid_up_to()))?;
    if text.trim().is_empty() {
        return Err(IngestError::EmptyDocument);
    }
    let raw_text = normalize_newlines(text);
    let format = format_hint.unwrap_or_else(|| detect_format(&raw_text));
    Ok(SourceDocument::new(format, raw_text))
}

impl SourceDocument {
    pub fn new(format: DocFormat, raw_text: String) -> SourceDocument {
        let title = match format {
            DocFormat::Latex => LATEX_TITLE.captures(&raw_text).map(|c| c[1].trim().to_owned()),
            DocFormat::NougatMarkdown => MD_HEADING.captures(&raw_text).map(|c| c[1].trim().to_owned()),
        };
        let spans = match format {
            DocFormat::Latex => latex_blocks(&raw_text),
            DocFormat::NougatMarkdown => markdown_blocks(&raw_text),
        };
        SourceDocument {
            doc_id: content_id("doc-", &(format, &raw_text)),
            format,
            raw_text,
            title,
            spans,
        }
    }
}

/// Outermost environments, looking inside `document` rather than treating it
/// as one block.
fn latex_blocks(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut stack: Vec<(String, usize)> = Vec::new();
    for cap in BEGIN_END.captures_iter(text) {
        let whole = cap.get(0).unwrap();
        let name = &cap[2];
        if &cap[1] == "begin" {
            if name != "document" {
                stack.push((name.to_owned(), whole.start()));
            }
        } else if let Some(pos) = stack.iter().rposition(|(n, _)| n == name) {
            let (_, start) = stack[pos].clone();
            stack.truncate(pos);
            if stack.is_empty() {
                spans.push((start, whole.end()));
            }
        }
    }
    spans
}

/// Heading-delimited blocks; text before the first heading is its own block.
fn markdown_blocks(text: &str) -> Vec<(usize, usize)> {
    let mut starts: Vec<usize> = MD_HEADING.find_iter(text).map(|m| m.start()).collect();
    if starts.first() != Some(&0) {
        starts.insert(0, 0);
    }
    let mut spans = Vec::new();
    for (i, &s) in starts.iter().enumerate() {
        let e = starts.get(i + 1).copied().unwrap_or(text.len());
        if !text[s..e].trim().is_empty() {
            spans.push((s, e));
        }
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_detection() {
        let d = load_document(b"\\documentclass{article}\n\\begin{document}x\\end{document}", None).unwrap();
        assert_eq!(d.format, DocFormat::Latex);
        let d = load_document(b"# Title\n\nSome \\(x\\) math.", None).unwrap();
        assert_eq!(d.format, DocFormat::NougatMarkdown);
        assert_eq!(d.title.as_deref(), Some("Title"));
        let d = load_document(b"# Title", Some(DocFormat::Latex)).unwrap();
        assert_eq!(d.format, DocFormat::Latex);
    }

    #[test]
    fn empty_and_undecodable() {
        assert_eq!(load_document(b"", None), Err(IngestError::EmptyDocument));
        assert_eq!(load_document(b"\xEF\xBB\xBF \n\t", None), Err(IngestError::EmptyDocument));
        assert_eq!(load_document(b"ab\xff", None), Err(IngestError::DecodeError(2)));
    }

    #[test]
    fn bom_and_crlf() {
        let d = load_document(b"\xEF\xBB\xBFa\r\nb", None).unwrap();
        assert_eq!(d.raw_text, "a\nb");
    }

    #[test]
    fn latex_spans_are_top_level() {
        let t = "\\begin{document}\n\\begin{theorem}a\\begin{proof}b\\end{proof}\\end{theorem}\n\\begin{lemma}c\\end{lemma}\\end{document}";
        let d = SourceDocument::new(DocFormat::Latex, t.into());
        assert_eq!(d.spans.len(), 2);
        assert!(d.spans.windows(2).all(|w| w[0].1 <= w[1].0));
        assert!(t[d.spans[0].0..d.spans[0].1].ends_with("\\end{theorem}"));
    }

    #[test]
    fn markdown_spans_cover_headings() {
        let t = "intro\n# A\ntext\n## B\nmore\n";
        let d = SourceDocument::new(DocFormat::NougatMarkdown, t.into());
        assert_eq!(d.spans, vec![(0, 6), (6, 15), (15, 25)]);
    }
}
