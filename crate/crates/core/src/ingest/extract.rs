use super::document::SourceDocument;
use crate::canonical::content_id;
use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::LazyLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementKind {
    Definition,
    Theorem,
    Lemma,
    Proposition,
    Corollary,
    Proof,
    Remark,
}

impl StatementKind {
    pub const ALL: [StatementKind; 7] = [
        StatementKind::Definition,
        StatementKind::Theorem,
        StatementKind::Lemma,
        StatementKind::Proposition,
        StatementKind::Corollary,
        StatementKind::Proof,
        StatementKind::Remark,
    ];

    pub fn env_name(self) -> &'static str {
        match self {
            StatementKind::Definition => "definition",
            StatementKind::Theorem => "theorem",
            StatementKind::Lemma => "lemma",
            StatementKind::Proposition => "proposition",
            StatementKind::Corollary => "corollary",
            StatementKind::Proof => "proof",
            StatementKind::Remark => "remark",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            StatementKind::Definition => "Definition",
            StatementKind::Theorem => "Theorem",
            StatementKind::Lemma => "Lemma",
            StatementKind::Proposition => "Proposition",
            StatementKind::Corollary => "Corollary",
            StatementKind::Proof => "Proof",
            StatementKind::Remark => "Remark",
        }
    }

    pub fn from_env(name: &str) -> Option<StatementKind> {
        StatementKind::ALL.into_iter().find(|k| k.env_name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementRecord {
    pub stmt_id: String,
    pub kind: StatementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub body_latex: String,
    /// The first entry is the record's canonical term.
    pub introduced_terms: Vec<String>,
    pub used_terms: Vec<String>,
    pub source_span: (usize, usize),
    /// For proofs: the statement being proved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proves: Option<String>,
}

impl StatementRecord {
    pub fn canonical_term(&self) -> Option<&str> {
        self.introduced_terms.first().map(String::as_str)
    }

    /// Short human-readable name: the label, else the canonical term.
    pub fn display_name(&self) -> String {
        match (&self.label, self.canonical_term()) {
            (Some(l), Some(t)) => format!("{l} ({t})"),
            (Some(l), None) => l.clone(),
            (None, Some(t)) => format!("{} ({t})", self.kind.display_name()),
            (None, None) => self.kind.display_name().to_owned(),
        }
    }
}

static ENV_TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\\(begin|end)\{(definition|theorem|lemma|proposition|corollary|proof|remark)(\*?)\}").unwrap()
});
static LABEL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\\label\{([^}]*)\}").unwrap());
static EMPHASIS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\\(?:emph|textit|textbf)\{([^{}$]+)\}|\*\*([^*$]+)\*\*").unwrap()
});
static INTRO_PATTERN: LazyLock<Regex> = LazyLock::new(|| {
    RegexBuilder::new(
        r"\b(?:a|an)\s+([a-z][a-z-]*(?:\s+[a-z][a-z-]*){0,4}?)\s+(?:\$[^$]*\$\s+)?is\b",
    )
    .case_insensitive(true)
    .build()
    .unwrap()
});
static STOP_WORDS: &[&str] = &["and", "or", "where", "such", "that", "which", "is", "a", "an", "the"];

#[derive(Debug)]
struct EnvNode {
    kind: StatementKind,
    starred: bool,
    start: usize,
    body_start: usize,
    body_end: usize,
    end: usize,
    children: Vec<(usize, usize)>,
    title: Option<String>,
}

/// Recognized environments, outermost first, each with the ranges of its
/// directly nested recognized environments.
fn scan_environments(text: &str) -> Vec<EnvNode> {
    let mut open: Vec<EnvNode> = Vec::new();
    let mut done: Vec<EnvNode> = Vec::new();
    for cap in ENV_TOKEN.captures_iter(text) {
        let whole = cap.get(0).unwrap();
        let kind = StatementKind::from_env(&cap[2]).expect("regex only matches known names");
        let starred = !cap[3].is_empty();
        if &cap[1] == "begin" {
            let (title, body_start) = bracket_title(text, whole.end());
            open.push(EnvNode {
                kind,
                starred,
                start: whole.start(),
                body_start,
                body_end: body_start,
                end: body_start,
                children: Vec::new(),
                title,
            });
        } else if let Some(pos) = open.iter().rposition(|n| n.kind == kind && n.starred == starred) {
            // Unclosed inner environments are dropped.
            open.truncate(pos + 1);
            let mut node = open.pop().unwrap();
            node.body_end = whole.start().max(node.body_start);
            node.end = whole.end();
            if let Some(parent) = open.last_mut() {
                parent.children.push((node.start, node.end));
            }
            done.push(node);
        }
    }
    done.sort_by_key(|n| n.start);
    done
}

fn bracket_title(text: &str, at: usize) -> (Option<String>, usize) {
    let rest = &text[at..];
    let trimmed = rest.trim_start_matches([' ', '\t']);
    if let Some(inner) = trimmed.strip_prefix('[') {
        if let Some(close) = inner.find(']') {
            let title = inner[..close].trim().to_owned();
            let consumed = rest.len() - trimmed.len() + 1 + close + 1;
            return ((!title.is_empty()).then_some(title), at + consumed);
        }
    }
    (None, at)
}

fn body_text(text: &str, node: &EnvNode) -> String {
    let mut out = String::new();
    let mut pos = node.body_start;
    for &(s, e) in &node.children {
        out.push_str(&text[pos..s]);
        out.push('\n');
        pos = e;
    }
    out.push_str(&text[pos..node.body_end]);
    out.trim().to_owned()
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn term_regex(term: &str) -> Regex {
    let words: Vec<String> = term.split(' ').map(regex::escape).collect();
    RegexBuilder::new(&format!(r"\b{}s?\b", words.join(r"\s+")))
        .case_insensitive(true)
        .build()
        .expect("escaped term is a valid regex")
}

/// Lower-case, collapse whitespace, and drop a plural `s` when the singular
/// also occurs in `corpus` (already lower-cased).
pub fn normalize_term(raw: &str, corpus: &str) -> String {
    let t = collapse(raw);
    if let Some(singular) = t.strip_suffix('s') {
        if !singular.is_empty() && !singular.ends_with('s') && term_regex_exact(singular).is_match(corpus) {
            return singular.to_owned();
        }
    }
    t
}

fn term_regex_exact(term: &str) -> Regex {
    let words: Vec<String> = term.split(' ').map(regex::escape).collect();
    Regex::new(&format!(r"\b{}\b", words.join(r"\s+"))).expect("escaped term is a valid regex")
}

fn first_sentence(body: &str) -> &str {
    // A period followed by whitespace outside math ends the sentence.
    let mut in_math = false;
    let bytes = body.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'$' => in_math = !in_math,
            b'.' if !in_math && bytes.get(i + 1).is_none_or(|c| c.is_ascii_whitespace()) => {
                return &body[..i];
            }
            _ => {}
        }
    }
    body
}

fn introduced_terms(body: &str, corpus: &str) -> Vec<String> {
    let mut terms: Vec<String> = Vec::new();
    let mut push = |t: String| {
        if !t.is_empty() && !terms.contains(&t) {
            terms.push(t);
        }
    };
    for cap in EMPHASIS.captures_iter(body) {
        let raw = cap.get(1).or_else(|| cap.get(2)).unwrap().as_str();
        push(normalize_term(raw, corpus));
    }
    if let Some(cap) = INTRO_PATTERN.captures(first_sentence(body)) {
        let phrase = collapse(&cap[1]);
        if !phrase.split(' ').any(|w| STOP_WORDS.contains(&w)) {
            push(normalize_term(&phrase, corpus));
        }
    }
    terms
}

fn used_terms(body: &str, known: &[String]) -> Vec<String> {
    let mut hits: Vec<(usize, &String)> = known
        .iter()
        .filter_map(|t| term_regex(t).find(body).map(|m| (m.start(), t)))
        .collect();
    hits.sort();
    let mut seen = BTreeSet::new();
    hits.into_iter()
        .filter(|(_, t)| seen.insert(t.as_str()))
        .map(|(_, t)| t.clone())
        .collect()
}

/// One record per recognized statement environment, in document order.
/// Expects a normalized document.
pub fn extract_statements(doc: &SourceDocument) -> Vec<StatementRecord> {
    let text = &doc.raw_text;
    let corpus = text.to_lowercase();
    let mut counters = [0usize; 7];
    let mut known_terms: Vec<String> = Vec::new();
    let mut records: Vec<StatementRecord> = Vec::new();

    for node in scan_environments(text) {
        let body = body_text(text, &node);
        if body.is_empty() {
            continue;
        }
        let kind = node.kind;
        let label = label_for(&node, &body, &mut counters[kind as usize]);
        let introduced = if kind == StatementKind::Definition {
            introduced_terms(&body, &corpus)
        } else {
            Vec::new()
        };
        let used = used_terms(&body, &known_terms);
        let proves = (kind == StatementKind::Proof)
            .then(|| {
                records
                    .iter()
                    .rev()
                    .find(|r| r.kind != StatementKind::Proof && r.source_span.0 < node.start)
                    .map(|r| r.stmt_id.clone())
            })
            .flatten();
        let stmt_id = content_id("st-", &(kind, &body, node.start));
        for t in &introduced {
            if !known_terms.contains(t) {
                known_terms.push(t.clone());
            }
        }
        records.push(StatementRecord {
            stmt_id,
            kind,
            label,
            body_latex: body,
            introduced_terms: introduced,
            used_terms: used,
            source_span: (node.start, node.end),
            proves,
        });
    }
    records
}

fn label_for(node: &EnvNode, body: &str, counter: &mut usize) -> Option<String> {
    if let Some(cap) = LABEL.captures(body) {
        return Some(cap[1].to_owned());
    }
    if node.kind == StatementKind::Proof {
        return None;
    }
    let name = node.kind.display_name();
    if let Some(t) = &node.title {
        if let Ok(n) = t.parse::<usize>() {
            *counter = n;
            return Some(format!("{name} {n}"));
        }
        if t.chars().all(|c| c.is_ascii_digit() || c == '.') {
            return Some(format!("{name} {t}"));
        }
        if node.starred {
            return Some(t.clone());
        }
    }
    if node.starred {
        return Some(name.to_owned());
    }
    *counter += 1;
    Some(format!("{name} {counter}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{DocFormat, SourceDocument};

    fn latex(t: &str) -> Vec<StatementRecord> {
        extract_statements(&SourceDocument::new(DocFormat::Latex, t.into()))
    }

    #[test]
    fn no_environments() {
        assert!(latex("just text").is_empty());
    }

    #[test]
    fn intro_pattern_and_used_terms() {
        let recs = latex(
            "\\begin{definition}A symbolic space is a set.\\end{definition}\n\
             \\begin{definition}An effective symbolic space is a pair $(X,P)$ where $X$ is a symbolic space.\\end{definition}",
        );
        assert_eq!(recs[0].introduced_terms, vec!["symbolic space"]);
        assert_eq!(recs[1].introduced_terms, vec!["effective symbolic space"]);
        assert_eq!(recs[1].used_terms, vec!["symbolic space"]);
        assert_eq!(recs[1].label.as_deref(), Some("Definition 2"));
    }

    #[test]
    fn emphasis_first_is_canonical() {
        let recs = latex("\\begin{definition}[Maps] A \\emph{bijection} or \\textbf{one-to-one map} is fine.\\end{definition}");
        assert_eq!(recs[0].introduced_terms, vec!["bijection", "one-to-one map"]);
        assert_eq!(recs[0].canonical_term(), Some("bijection"));
    }

    #[test]
    fn mapping_with_math_before_is() {
        let recs = latex("\\begin{definition}Given sets $X$ and $Y$, a mapping $h$ is a map.\\end{definition}");
        assert_eq!(recs[0].introduced_terms, vec!["mapping"]);
    }

    #[test]
    fn plural_and_case() {
        assert_eq!(normalize_term("Cantor  Spaces", "a cantor space"), "cantor space");
        assert_eq!(normalize_term("axes", "nothing"), "axes");
        let recs = latex(
            "\\begin{definition}A widget is a thing.\\end{definition}\\begin{lemma}Widgets exist.\\end{lemma}",
        );
        assert_eq!(recs[1].used_terms, vec!["widget"]);
    }

    #[test]
    fn nested_proof_is_split_out() {
        let recs = latex(
            "\\begin{theorem}\\label{thm:a} P holds.\\begin{proof}Easy.\\end{proof} Also Q.\\end{theorem}",
        );
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].kind, StatementKind::Theorem);
        assert_eq!(recs[0].label.as_deref(), Some("thm:a"));
        assert!(!recs[0].body_latex.contains("Easy"));
        assert!(recs[0].body_latex.contains("Also Q."));
        assert_eq!(recs[1].kind, StatementKind::Proof);
        assert_eq!(recs[1].proves.as_deref(), Some(recs[0].stmt_id.as_str()));
    }

    #[test]
    fn numbering_labels() {
        let recs = latex(
            "\\begin{lemma}[3] a\\end{lemma}\\begin{lemma}b\\end{lemma}\\begin{theorem*}c\\end{theorem*}\\begin{lemma*}[Zorn] d\\end{lemma*}",
        );
        let labels: Vec<_> = recs.iter().map(|r| r.label.clone().unwrap()).collect();
        assert_eq!(labels, vec!["Lemma 3", "Lemma 4", "Theorem", "Zorn"]);
    }

    #[test]
    fn deterministic_ids() {
        let t = "\\begin{remark}r\\end{remark}\\begin{remark}r\\end{remark}";
        let a = latex(t);
        assert_eq!(a, latex(t));
        assert_ne!(a[0].stmt_id, a[1].stmt_id);
    }
}
