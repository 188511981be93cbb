use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_tag: Option<String>,
    pub text: String,
    pub origin_span: (usize, usize),
}

static HEADER_LINE: LazyLock<Regex> = LazyLock::new(|| {
    RegexBuilder::new(r"^\s*(?:[A-Za-z][A-Za-z0-9_?]*\s*(?:\[[^\]]*\])?\s*:\s*THEORY\b|theory\s+[A-Za-z][A-Za-z0-9_?]*)")
        .case_insensitive(true)
        .build()
        .unwrap()
});
static END_WORD: LazyLock<Regex> =
    LazyLock::new(|| RegexBuilder::new(r"\bEND\b").case_insensitive(true).build().unwrap());

/// (start, end-without-newline, end-with-newline) of every line.
fn lines(text: &str) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < text.len() {
        let end = text[pos..].find('\n').map_or(text.len(), |i| pos + i);
        let next = (end + 1).min(text.len());
        out.push((pos, end, next));
        pos = if end == text.len() { end } else { next };
    }
    out
}

/// Fenced blocks in order; if there are none, a bare theory from its header
/// line through the last line mentioning END.
pub fn extract_code_blocks(response: &str) -> Vec<CodeBlock> {
    let lines = lines(response);
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (s, e, _) = lines[i];
        let line = &response[s..e];
        let Some(info) = line.trim_start().strip_prefix("```") else {
            i += 1;
            continue;
        };
        let close = (i + 1..lines.len()).find(|&j| response[lines[j].0..lines[j].1].trim() == "```");
        let Some(j) = close else { break };
        let body_start = lines[i].2;
        let body_end = lines[j].0;
        let text = response[body_start..body_end].to_owned();
        if !text.trim().is_empty() {
            let tag = info.trim();
            blocks.push(CodeBlock {
                language_tag: (!tag.is_empty()).then(|| tag.to_owned()),
                text,
                origin_span: (s, lines[j].1),
            });
        }
        i = j + 1;
    }
    if !blocks.is_empty() {
        return blocks;
    }

    let Some(h) = lines.iter().position(|&(s, e, _)| HEADER_LINE.is_match(&response[s..e])) else {
        return blocks;
    };
    let last_end = (h..lines.len()).rev().find(|&j| END_WORD.is_match(&response[lines[j].0..lines[j].1]));
    if let Some(j) = last_end {
        let (start, end) = (lines[h].0, lines[j].1);
        blocks.push(CodeBlock {
            language_tag: None,
            text: response[start..lines[j].2].to_owned(),
            origin_span: (start, end),
        });
    }
    blocks
}

/// The first block tagged `pvs` (or untagged), falling back to the first block.
pub fn pvs_block(response: &str) -> Option<CodeBlock> {
    let blocks = extract_code_blocks(response);
    blocks
        .iter()
        .find(|b| b.language_tag.as_deref().is_none_or(|t| t.eq_ignore_ascii_case("pvs")))
        .or(blocks.first())
        .cloned()
}
