//! Tokenizer for the supported PVS subset.

use super::diagnostic::{codes, Diagnostic, Span};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Keyword {
    Theory,
    Begin,
    End,
    Importing,
    Exporting,
    Type,
    NonemptyType,
    Var,
    Lambda,
    Forall,
    Exists,
    And,
    Or,
    Not,
    Implies,
    Iff,
    If,
    Then,
    Else,
    Endif,
    Axiom,
    Lemma,
    Theorem,
    Proposition,
    Corollary,
    Obligation,
    Datatype,
    Recursive,
    Measure,
    Judgement,
    Conversion,
}

impl Keyword {
    pub fn lookup(word: &str) -> Option<Keyword> {
        use Keyword::*;
        let kw = match word.to_ascii_uppercase().as_str() {
            "THEORY" => Theory,
            "BEGIN" => Begin,
            "END" => End,
            "IMPORTING" => Importing,
            "EXPORTING" => Exporting,
            "TYPE" => Type,
            "NONEMPTY_TYPE" => NonemptyType,
            "VAR" => Var,
            "LAMBDA" => Lambda,
            "FORALL" => Forall,
            "EXISTS" => Exists,
            "AND" => And,
            "OR" => Or,
            "NOT" => Not,
            "IMPLIES" => Implies,
            "IFF" => Iff,
            "IF" => If,
            "THEN" => Then,
            "ELSE" => Else,
            "ENDIF" => Endif,
            "AXIOM" => Axiom,
            "LEMMA" => Lemma,
            "THEOREM" => Theorem,
            "PROPOSITION" => Proposition,
            "COROLLARY" => Corollary,
            "OBLIGATION" => Obligation,
            "DATATYPE" => Datatype,
            "RECURSIVE" => Recursive,
            "MEASURE" => Measure,
            "JUDGEMENT" => Judgement,
            "CONVERSION" => Conversion,
            _ => return None,
        };
        Some(kw)
    }

    /// Canonical (upper-case) spelling.
    pub fn as_str(self) -> &'static str {
        use Keyword::*;
        match self {
            Theory => "THEORY",
            Begin => "BEGIN",
            End => "END",
            Importing => "IMPORTING",
            Exporting => "EXPORTING",
            Type => "TYPE",
            NonemptyType => "NONEMPTY_TYPE",
            Var => "VAR",
            Lambda => "LAMBDA",
            Forall => "FORALL",
            Exists => "EXISTS",
            And => "AND",
            Or => "OR",
            Not => "NOT",
            Implies => "IMPLIES",
            Iff => "IFF",
            If => "IF",
            Then => "THEN",
            Else => "ELSE",
            Endif => "ENDIF",
            Axiom => "AXIOM",
            Lemma => "LEMMA",
            Theorem => "THEOREM",
            Proposition => "PROPOSITION",
            Corollary => "COROLLARY",
            Obligation => "OBLIGATION",
            Datatype => "DATATYPE",
            Recursive => "RECURSIVE",
            Measure => "MEASURE",
            Judgement => "JUDGEMENT",
            Conversion => "CONVERSION",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Identifier,
    Keyword(Keyword),
    Number,
    Operator,
    Punctuation,
    String,
    Comment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is_keyword(&self, kw: Keyword) -> bool {
        self.kind == TokenKind::Keyword(kw)
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.text == p
    }

    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Operator && self.text == op
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Lexed {
    /// Tokens with comments removed, the parser's view.
    pub fn significant(&self) -> Vec<Token> {
        self.tokens
            .iter()
            .filter(|t| t.kind != TokenKind::Comment)
            .cloned()
            .collect()
    }
}

// Longest first so `<=>` wins over `<=` and `=`.
const OPERATORS: &[&str] = &[
    "<=>", "=>", "->", "/=", "<=", ">=", "=", "<", ">", "+", "-", "*", "/", "&",
];
const PUNCTUATION: &[char] = &[':', ',', '(', ')', '[', ']', '{', '}', '|', '.', ';', '#', '!', '`'];

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '?'
}

/// Tokenize `text`. Unlexable characters produce `E_BAD_CHAR` and are
/// skipped; lexing always runs to the end of input.
pub fn lex(text: &str) -> Lexed {
    let mut out = Lexed::default();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        let kind = if c == '%' {
            i = text[i..].find('\n').map(|n| i + n).unwrap_or(text.len());
            TokenKind::Comment
        } else if c.is_ascii_alphabetic() {
            i += text[i..]
                .find(|ch: char| !is_ident_continue(ch))
                .unwrap_or(text.len() - i);
            match Keyword::lookup(&text[start..i]) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Identifier,
            }
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            TokenKind::Number
        } else if c == '"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' {
                i += if bytes[i] == b'\\' { 2 } else { 1 };
            }
            i = (i + 1).min(text.len());
            TokenKind::String
        } else if let Some(op) = OPERATORS.iter().find(|op| text[i..].starts_with(**op)) {
            i += op.len();
            TokenKind::Operator
        } else if PUNCTUATION.contains(&c) {
            i += 1;
            TokenKind::Punctuation
        } else {
            i += c.len_utf8();
            out.diagnostics.push(Diagnostic::error(
                codes::E_BAD_CHAR,
                Span::from_range(text, start, i),
                format!("unexpected character {c:?}"),
            ));
            continue;
        };
        out.tokens.push(Token {
            kind,
            text: text[start..i].to_owned(),
            start,
            end: i,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        lex(text).tokens.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn theory_header() {
        let lexed = lex("Mappings: THEORY");
        let toks: Vec<_> = lexed.tokens.iter().map(|t| (t.kind, t.text.as_str())).collect();
        assert_eq!(
            toks,
            vec![
                (TokenKind::Identifier, "Mappings"),
                (TokenKind::Punctuation, ":"),
                (TokenKind::Keyword(Keyword::Theory), "THEORY"),
            ]
        );
        assert!(lexed.diagnostics.is_empty());
    }

    #[test]
    fn keywords_are_case_insensitive() {
        assert_eq!(kinds("theory"), vec![TokenKind::Keyword(Keyword::Theory)]);
        assert_eq!(kinds("Begin"), vec![TokenKind::Keyword(Keyword::Begin)]);
    }

    #[test]
    fn comment_then_identifier() {
        assert_eq!(kinds("% comment\nx"), vec![TokenKind::Comment, TokenKind::Identifier]);
    }

    #[test]
    fn bad_char_reported_and_lexing_continues() {
        let lexed = lex("a § b");
        assert_eq!(lexed.diagnostics.len(), 1);
        assert_eq!(lexed.diagnostics[0].code, codes::E_BAD_CHAR);
        assert_eq!(lexed.tokens.len(), 2);
    }

    #[test]
    fn operators_longest_match() {
        let lexed = lex("a <=> b <= c => d /= e");
        let ops: Vec<_> = lexed
            .tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Operator)
            .map(|t| t.text.as_str())
            .collect();
        assert_eq!(ops, vec!["<=>", "<=", "=>", "/="]);
    }

    #[test]
    fn predicate_identifiers() {
        let lexed = lex("bijective?(h)");
        assert_eq!(lexed.tokens[0].text, "bijective?");
    }

    #[test]
    fn numbers() {
        let lexed = lex("1 23 4.5");
        assert!(lexed.tokens.iter().all(|t| t.kind == TokenKind::Number));
        assert_eq!(lexed.tokens[2].text, "4.5");
    }
}
