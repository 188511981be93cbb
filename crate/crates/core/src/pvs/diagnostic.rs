use serde::{Deserialize, Serialize};
use std::fmt;

/// Stable diagnostic codes. Append-only: repair rules, tests and the UI key
/// on these strings.
pub mod codes {
    pub const E_BAD_CHAR: &str = "E_BAD_CHAR";
    pub const E_PARSE: &str = "E_PARSE";
    pub const E_THEORY_HEADER: &str = "E_THEORY_HEADER";
    pub const E_IMPORT_BEFORE_BEGIN: &str = "E_IMPORT_BEFORE_BEGIN";
    pub const E_END_NAME_MISMATCH: &str = "E_END_NAME_MISMATCH";
    pub const E_UNKNOWN_PRELUDE_NAME: &str = "E_UNKNOWN_PRELUDE_NAME";
    pub const E_DUP_DECL: &str = "E_DUP_DECL";
    pub const E_ARITY: &str = "E_ARITY";
    pub const E_PVS: &str = "E_PVS";
    pub const W_UNUSED_DECL: &str = "W_UNUSED_DECL";
    pub const W_OPAQUE_DECL: &str = "W_OPAQUE_DECL";

    /// Every published code, in registration order.
    pub const REGISTRY: &[&str] = &[
        E_BAD_CHAR,
        E_PARSE,
        E_THEORY_HEADER,
        E_IMPORT_BEFORE_BEGIN,
        E_END_NAME_MISMATCH,
        E_UNKNOWN_PRELUDE_NAME,
        E_DUP_DECL,
        E_ARITY,
        E_PVS,
        W_UNUSED_DECL,
        W_OPAQUE_DECL,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A source location. `line` and `column` are 1-based, `column` counts
/// characters; `offset` and `length` are in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub length: u32,
    pub offset: u32,
}

impl Span {
    pub fn start(&self) -> usize {
        self.offset as usize
    }

    pub fn end(&self) -> usize {
        (self.offset + self.length) as usize
    }

    /// Build a span for the byte range `start..end` of `text`.
    pub fn from_range(text: &str, start: usize, end: usize) -> Span {
        let before = &text[..start];
        let line = before.matches('\n').count() as u32 + 1;
        let line_start = before.rfind('\n').map(|i| i + 1).unwrap_or(0);
        let column = text[line_start..start].chars().count() as u32 + 1;
        Span {
            line,
            column,
            length: (end - start) as u32,
            offset: start as u32,
        }
    }
}

/// Byte-offset to line/column translation for one source text.
#[derive(Debug, Clone)]
pub struct LineIndex<'a> {
    text: &'a str,
    line_starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { text, line_starts }
    }

    pub fn span(&self, start: usize, end: usize) -> Span {
        let line = self.line_starts.partition_point(|&s| s <= start) - 1;
        let column = self.text[self.line_starts[line]..start].chars().count();
        Span {
            line: line as u32 + 1,
            column: column as u32 + 1,
            length: (end - start) as u32,
            offset: start as u32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub span: Span,
    pub message: String,
    pub fixable: bool,
    /// Replacement text proposed by the producer (a rename target, a
    /// rewritten header, the expected END name).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestion: Option<String>,
    /// A second location the fix depends on, e.g. the BEGIN keyword an
    /// importing must move behind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Span>,
}

impl Diagnostic {
    pub fn error(code: &str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_owned(),
            span,
            message: message.into(),
            fixable: false,
            suggestion: None,
            anchor: None,
        }
    }

    pub fn warning(code: &str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, span, message)
        }
    }

    pub fn fixable(mut self, suggestion: impl Into<String>) -> Self {
        self.fixable = true;
        self.suggestion = Some(suggestion.into());
        self
    }

    pub fn with_anchor(mut self, anchor: Span) -> Self {
        self.anchor = Some(anchor);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {sev}[{}]: {}",
            self.span.line, self.span.column, self.code, self.message
        )?;
        if let Some(s) = &self.suggestion {
            write!(f, " (suggested: {s})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_line_and_column() {
        let text = "ab\ncdé f";
        let s = Span::from_range(text, 7, 8);
        assert_eq!((s.line, s.column, s.length), (2, 4, 1));
        assert_eq!(LineIndex::new(text).span(7, 8), s);
        assert_eq!(LineIndex::new(text).span(0, 1), Span::from_range(text, 0, 1));
        assert_eq!(LineIndex::new(text).span(3, 3), Span::from_range(text, 3, 3));
    }

    #[test]
    fn registry_has_no_duplicates() {
        let mut seen = std::collections::HashSet::new();
        for c in codes::REGISTRY {
            assert!(seen.insert(*c), "duplicate {c}");
        }
    }

    #[test]
    fn json_shape() {
        let d = Diagnostic::error(codes::E_PARSE, Span::default(), "boom");
        let v = serde_json::to_value(&d).unwrap();
        for key in ["code", "severity", "span", "message", "fixable"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["severity"], "error");
    }
}
