use super::document::{DocFormat, SourceDocument};
use regex::Regex;
use std::sync::LazyLock;

/// Bold statement header at the start of a line, e.g. `**Definition 3**`,
/// `**Theorem.**` or `**Lemma 2.**`, followed by the statement paragraph.
static BOLD_HEADER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?m)^\*\*(Definition|Theorem|Lemma|Proposition|Corollary|Remark|Proof)(?:[ \t]+([0-9]+(?:\.[0-9]+)*))?\.?\*\*\.?[ \t]*",
    )
    .unwrap()
});

/// Rewrite `\(..\)` and `\[..\]` as `$..$` and `$$..$$`. Escaped
/// backslashes (`\\`) are copied through untouched.
pub fn normalize_delimiters(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.peek() {
            Some('\\') => {
                out.push_str("\\\\");
                chars.next();
            }
            Some('(') | Some(')') => {
                out.push('$');
                chars.next();
            }
            Some('[') | Some(']') => {
                out.push_str("$$");
                chars.next();
            }
            _ => out.push('\\'),
        }
    }
    out
}

/// The paragraph that follows a bold header: the rest of the header line
/// (which must be non-empty) plus any following non-blank lines. Returns the paragraph's end offset.
fn paragraph_end(text: &str, from: usize) -> usize {
    let mut pos = from;
    let mut first = true;
    loop {
        let line_end = text[pos..].find('\n').map_or(text.len(), |i| pos + i);
        let line = &text[pos..line_end];
        if !first && (line.trim().is_empty() || line.starts_with('#') || BOLD_HEADER.is_match(line)) {
            // Back off the newline that ended the previous line.
            return pos.saturating_sub(1).max(from);
        }
        first = false;
        if line_end == text.len() {
            return line_end;
        }
        pos = line_end + 1;
    }
}

fn rewrite_bold_headers(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for cap in BOLD_HEADER.captures_iter(text) {
        let whole = cap.get(0).unwrap();
        if whole.start() < last {
            continue;
        }
        let line_rest = text[whole.end()..].split('\n').next().unwrap_or("");
        if line_rest.trim().is_empty() {
            continue;
        }
        let end = paragraph_end(text, whole.end());
        let body = text[whole.end()..end].trim_end();
        if body.trim().is_empty() {
            continue;
        }
        let env = cap[1].to_ascii_lowercase();
        let env = match (&cap.get(2), env.as_str()) {
            (None, "proof") => env,
            (None, _) => format!("{env}*"),
            (Some(_), _) => env,
        };
        out.push_str(&text[last..whole.start()]);
        out.push_str(&format!("\\begin{{{env}}}"));
        if let Some(n) = cap.get(2) {
            out.push_str(&format!("[{}]", n.as_str()));
        }
        out.push(' ');
        out.push_str(body);
        out.push_str(&format!("\\end{{{env}}}"));
        last = whole.end() + body.len();
    }
    out.push_str(&text[last..]);
    out
}

/// Normalize math delimiters, and for markdown input turn bold statement
/// headers into pseudo-environments. Idempotent.
pub fn normalize_markup(doc: &SourceDocument) -> SourceDocument {
    let mut text = normalize_delimiters(&doc.raw_text);
    if doc.format == DocFormat::NougatMarkdown {
        text = rewrite_bold_headers(&text);
    }
    if text == doc.raw_text {
        return doc.clone();
    }
    SourceDocument::new(doc.format, text)
}
