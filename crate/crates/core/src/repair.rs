//! Rule-based repair of generated PVS text.
//!
//! Each fixable diagnostic code maps to exactly one rule. Rules edit the
//! source text, never the AST, so formatting and comments outside the edited
//! region survive. [`repair_to_fixpoint`] alternates analysis and repair until
//! nothing fixable remains.

use crate::pvs::{analyze, codes, Diagnostic, PreludeIndex, Span};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RULESET_VERSION: u32 = 1;

pub const DEFAULT_MAX_PASSES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    RewriteHeader,
    MoveImportingAfterBegin,
    RenameReference,
    FixEndName,
}

impl EditKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EditKind::RewriteHeader => "rewrite_header",
            EditKind::MoveImportingAfterBegin => "move_importing_after_begin",
            EditKind::RenameReference => "rename_reference",
            EditKind::FixEndName => "fix_end_name",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RepairRule {
    pub rule_id: &'static str,
    pub triggers_on: &'static str,
    pub description: &'static str,
    pub edit: EditKind,
}

/// The rule registry, one rule per fixable diagnostic code.
pub const RULES: &[RepairRule] = &[
    RepairRule {
        rule_id: "rewrite_header",
        triggers_on: codes::E_THEORY_HEADER,
        description: "rewrite `theory Name` as `Name: THEORY`",
        edit: EditKind::RewriteHeader,
    },
    RepairRule {
        rule_id: "move_importing_after_begin",
        triggers_on: codes::E_IMPORT_BEFORE_BEGIN,
        description: "move an IMPORTING clause from the header to just after BEGIN",
        edit: EditKind::MoveImportingAfterBegin,
    },
    RepairRule {
        rule_id: "rename_reference",
        triggers_on: codes::E_UNKNOWN_PRELUDE_NAME,
        description: "replace a misnamed prelude reference using the rename table",
        edit: EditKind::RenameReference,
    },
    RepairRule {
        rule_id: "fix_end_name",
        triggers_on: codes::E_END_NAME_MISMATCH,
        description: "make the name after END match the theory name",
        edit: EditKind::FixEndName,
    },
];

pub fn rule_for(code: &str) -> Option<&'static RepairRule> {
    RULES.iter().find(|r| r.triggers_on == code)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    RewriteHeader { span: Span, replacement: String },
    MoveImportingAfterBegin { importing: Span, begin: Span },
    RenameReference { span: Span, to: String },
    FixEndName { span: Span, name: String },
}

impl Transform {
    pub fn edit_kind(&self) -> EditKind {
        match self {
            Transform::RewriteHeader { .. } => EditKind::RewriteHeader,
            Transform::MoveImportingAfterBegin { .. } => EditKind::MoveImportingAfterBegin,
            Transform::RenameReference { .. } => EditKind::RenameReference,
            Transform::FixEndName { .. } => EditKind::FixEndName,
        }
    }

    /// Byte range the transform rewrites, before whitespace adjustment.
    fn anchor_range(&self) -> (usize, usize) {
        match self {
            Transform::RewriteHeader { span, .. }
            | Transform::RenameReference { span, .. }
            | Transform::FixEndName { span, .. } => (span.start(), span.end()),
            Transform::MoveImportingAfterBegin { importing, begin } => {
                (importing.start(), begin.end())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairApplication {
    pub rule_id: String,
    pub trigger: String,
    pub transform: Transform,
}

impl RepairApplication {
    pub fn position(&self) -> usize {
        self.transform.anchor_range().0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub rule_id: String,
    /// Byte range in the text as it stood when this entry was applied,
    /// replaying entries in log order from the original input.
    pub span_before: (usize, usize),
    pub text_before: String,
    pub text_after: String,
    pub pass_number: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairLog {
    pub entries: Vec<LogEntry>,
}

impl RepairLog {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Re-apply the logged edits to `original`.
    pub fn replay(&self, original: &str) -> Result<String, RepairError> {
        let mut text = original.to_owned();
        for e in &self.entries {
            let (s, t) = e.span_before;
            if text.get(s..t) != Some(e.text_before.as_str()) {
                return Err(RepairError::StaleSpan {
                    rule_id: e.rule_id.clone(),
                    offset: s,
                });
            }
            text.replace_range(s..t, &e.text_after);
        }
        Ok(text)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepairError {
    #[error("repair edits overlap: `{first}` and `{second}` at byte {offset}")]
    OverlappingEdits {
        first: String,
        second: String,
        offset: usize,
    },
    #[error("`{rule_id}` no longer matches the text at byte {offset}")]
    StaleSpan { rule_id: String, offset: usize },
    #[error("fixable diagnostics remain after {passes} passes")]
    MaxPassesExceeded {
        passes: usize,
        partial: Box<RepairOutcome>,
    },
}

/// One application per fixable diagnostic that has a registered rule,
/// ordered by source position.
pub fn plan_repairs(diags: &[Diagnostic]) -> Vec<RepairApplication> {
    let mut plan: Vec<RepairApplication> = diags
        .iter()
        .filter(|d| d.fixable)
        .filter_map(|d| {
            let rule = rule_for(&d.code)?;
            let transform = match rule.edit {
                EditKind::RewriteHeader => Transform::RewriteHeader {
                    span: d.span,
                    replacement: d.suggestion.clone()?,
                },
                EditKind::MoveImportingAfterBegin => Transform::MoveImportingAfterBegin {
                    importing: d.span,
                    begin: d.anchor?,
                },
                EditKind::RenameReference => Transform::RenameReference {
                    span: d.span,
                    to: d.suggestion.clone()?,
                },
                EditKind::FixEndName => Transform::FixEndName {
                    span: d.span,
                    name: d.suggestion.clone()?,
                },
            };
            Some(RepairApplication {
                rule_id: rule.rule_id.to_owned(),
                trigger: d.code.clone(),
                transform,
            })
        })
        .collect();
    plan.sort_by_key(|a| a.transform.anchor_range());
    plan
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '?')
}

/// A concrete text edit derived from one application.
struct Edit {
    rule_id: String,
    start: usize,
    end: usize,
    replacement: String,
}

fn slice<'t>(text: &'t str, span: &Span, rule_id: &str) -> Result<&'t str, RepairError> {
    text.get(span.start()..span.end()).ok_or_else(|| RepairError::StaleSpan {
        rule_id: rule_id.to_owned(),
        offset: span.start(),
    })
}

fn realize(text: &str, app: &RepairApplication) -> Result<Edit, RepairError> {
    let stale = || RepairError::StaleSpan {
        rule_id: app.rule_id.clone(),
        offset: app.position(),
    };
    let edit = |start, end, replacement: String| Edit {
        rule_id: app.rule_id.clone(),
        start,
        end,
        replacement,
    };
    match &app.transform {
        Transform::RewriteHeader { span, replacement } => {
            let found = slice(text, span, &app.rule_id)?;
            let head = found.get(..6).unwrap_or("");
            if !head.eq_ignore_ascii_case("theory") {
                return Err(stale());
            }
            Ok(edit(span.start(), span.end(), replacement.clone()))
        }
        Transform::MoveImportingAfterBegin { importing, begin } => {
            let clause = slice(text, importing, &app.rule_id)?;
            let begin_kw = slice(text, begin, &app.rule_id)?;
            let head = clause.get(..9).unwrap_or("");
            if !head.eq_ignore_ascii_case("importing")
                || !begin_kw.eq_ignore_ascii_case("begin")
                || importing.end() > begin.start()
            {
                return Err(stale());
            }
            // Take the whitespace in front of the clause along with it so the
            // header line closes up cleanly.
            let lead_start = text[..importing.start()].trim_end().len();
            let lead = &text[lead_start..importing.start()];
            let gap = &text[importing.end()..begin.start()];
            let gap = if gap.trim().is_empty() && !gap.contains('\n') {
                " "
            } else {
                gap
            };
            let lead = if lead.is_empty() { " " } else { lead };
            Ok(edit(
                lead_start,
                begin.end(),
                format!("{gap}{begin_kw}{lead}{clause}"),
            ))
        }
        Transform::RenameReference { span, to } => {
            let found = slice(text, span, &app.rule_id)?;
            if !is_ident(found) || found == to {
                return Err(stale());
            }
            Ok(edit(span.start(), span.end(), to.clone()))
        }
        Transform::FixEndName { span, name } => {
            if span.length == 0 {
                let before = text.get(..span.start()).ok_or_else(stale)?;
                let tail = before.len().checked_sub(3).and_then(|i| before.get(i..));
                if !tail.is_some_and(|t| t.eq_ignore_ascii_case("end")) {
                    return Err(stale());
                }
                Ok(edit(span.start(), span.end(), format!(" {name}")))
            } else {
                let found = slice(text, span, &app.rule_id)?;
                if !is_ident(found) {
                    return Err(stale());
                }
                Ok(edit(span.start(), span.end(), name.clone()))
            }
        }
    }
}

fn overlaps(a: (usize, usize), b: (usize, usize)) -> bool {
    if a == b {
        return true;
    }
    a.0 < b.1 && b.0 < a.1 || (a.0 == a.1 && b.0 < a.0 && a.0 < b.1) || (b.0 == b.1 && a.0 < b.0 && b.0 < a.1)
}

fn apply_pass(
    text: &str,
    plan: &[RepairApplication],
    pass_number: usize,
) -> Result<(String, Vec<LogEntry>), RepairError> {
    let mut edits = plan
        .iter()
        .map(|a| realize(text, a))
        .collect::<Result<Vec<_>, _>>()?;
    edits.sort_by_key(|e| (e.start, e.end));
    for pair in edits.windows(2) {
        if overlaps((pair[0].start, pair[0].end), (pair[1].start, pair[1].end)) {
            return Err(RepairError::OverlappingEdits {
                first: pair[0].rule_id.clone(),
                second: pair[1].rule_id.clone(),
                offset: pair[1].start,
            });
        }
    }

    let mut out = text.to_owned();
    for e in edits.iter().rev() {
        out.replace_range(e.start..e.end, &e.replacement);
    }

    let mut delta: isize = 0;
    let entries = edits
        .iter()
        .map(|e| {
            let start = (e.start as isize + delta) as usize;
            let len = e.end - e.start;
            delta += e.replacement.len() as isize - len as isize;
            LogEntry {
                rule_id: e.rule_id.clone(),
                span_before: (start, start + len),
                text_before: text[e.start..e.end].to_owned(),
                text_after: e.replacement.clone(),
                pass_number,
            }
        })
        .collect();
    Ok((out, entries))
}

/// Apply a plan to `text`. Edits are applied back to front so that every
/// span stays valid; overlapping edits are rejected.
pub fn apply_repairs(
    text: &str,
    plan: &[RepairApplication],
) -> Result<(String, RepairLog), RepairError> {
    let (out, entries) = apply_pass(text, plan, 1)?;
    Ok((out, RepairLog { entries }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub text: String,
    pub log: RepairLog,
    pub remaining: Vec<Diagnostic>,
    /// Passes that made at least one edit.
    pub passes: usize,
}

impl RepairOutcome {
    pub fn remaining_errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.remaining.iter().filter(|d| d.is_error())
    }
}

/// Select a prefix-greedy subset of `plan` whose edits do not overlap.
/// Deferred applications are picked up again on the next pass.
fn non_overlapping(text: &str, plan: &[RepairApplication]) -> Vec<RepairApplication> {
    let mut chosen: Vec<(RepairApplication, (usize, usize))> = Vec::new();
    for app in plan {
        let Ok(edit) = realize(text, app) else {
            continue;
        };
        let range = (edit.start, edit.end);
        if chosen.iter().all(|(_, r)| !overlaps(*r, range)) {
            chosen.push((app.clone(), range));
        }
    }
    chosen.into_iter().map(|(a, _)| a).collect()
}

fn fixable_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.fixable && rule_for(&d.code).is_some()).count()
}

/// Analyze, plan and apply until no fixable diagnostic remains.
///
/// A pass that fails to reduce the number of fixable diagnostics ends the
/// loop early; the leftovers are reported in `remaining`.
pub fn repair_to_fixpoint(
    text: &str,
    max_passes: usize,
    prelude: &PreludeIndex,
) -> Result<RepairOutcome, RepairError> {
    let max_passes = max_passes.max(1);
    let mut current = text.to_owned();
    let mut log = RepairLog::default();
    let mut passes = 0;
    let (_, mut diags) = analyze(&current, prelude);

    while passes < max_passes {
        let plan = plan_repairs(&diags);
        let selected = non_overlapping(&current, &plan);
        if selected.is_empty() {
            break;
        }
        let before = fixable_count(&diags);
        let (next, entries) = apply_pass(&current, &selected, passes + 1)?;
        let (_, next_diags) = analyze(&next, prelude);
        if fixable_count(&next_diags) >= before {
            break;
        }
        passes += 1;
        log.entries.extend(entries);
        current = next;
        diags = next_diags;
    }

    let outcome = RepairOutcome {
        text: current,
        log,
        remaining: diags,
        passes,
    };
    if passes == max_passes && !non_overlapping(&outcome.text, &plan_repairs(&outcome.remaining)).is_empty() {
        return Err(RepairError::MaxPassesExceeded {
            passes,
            partial: Box::new(outcome),
        });
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pvs::{codes, Severity};

    const RAW: &str = "theory Mappings\n  IMPORTING set_theory\nBEGIN\n  T: TYPE\n  s: set[T]\n  \
                       l: LEMMA FORALL (x: T): member(x, s)\nEND Mappings\n";

    fn prelude() -> PreludeIndex {
        PreludeIndex::bundled()
    }

    fn diag(code: &str, fixable: bool) -> Diagnostic {
        let d = Diagnostic::error(code, Span::default(), "x");
        if fixable {
            d.fixable("y")
        } else {
            d
        }
    }

    #[test]
    fn plan_for_the_three_documented_defects() {
        let (_, diags) = analyze(RAW, &prelude());
        let plan = plan_repairs(&diags);
        let kinds: Vec<_> = plan.iter().map(|a| a.transform.edit_kind()).collect();
        assert_eq!(
            kinds,
            vec![
                EditKind::RewriteHeader,
                EditKind::MoveImportingAfterBegin,
                EditKind::RenameReference
            ]
        );
        assert_eq!(
            plan[2].transform,
            Transform::RenameReference {
                span: diags.iter().find(|d| d.code == codes::E_UNKNOWN_PRELUDE_NAME).unwrap().span,
                to: "sets".into()
            }
        );
    }

    #[test]
    fn empty_and_unfixable_plans() {
        assert!(plan_repairs(&[]).is_empty());
        assert!(plan_repairs(&[diag(codes::E_PARSE, false)]).is_empty());
        assert!(plan_repairs(&[diag(codes::E_DUP_DECL, false)]).is_empty());
    }

    #[test]
    fn header_rewrite() {
        let (_, diags) = analyze(RAW, &prelude());
        let plan: Vec<_> = plan_repairs(&diags)
            .into_iter()
            .filter(|a| a.rule_id == "rewrite_header")
            .collect();
        let (text, log) = apply_repairs(RAW, &plan).unwrap();
        assert!(text.starts_with("Mappings: THEORY\n"));
        assert_eq!(log.len(), 1);
        assert_eq!(log.replay(RAW).unwrap(), text);
    }

    #[test]
    fn empty_plan_is_identity() {
        let (text, log) = apply_repairs(RAW, &[]).unwrap();
        assert_eq!(text, RAW);
        assert!(log.is_empty());
    }

    #[test]
    fn overlapping_edits_rejected() {
        let (_, diags) = analyze(RAW, &prelude());
        let plan = plan_repairs(&diags);
        assert!(matches!(
            apply_repairs(RAW, &plan),
            Err(RepairError::OverlappingEdits { .. })
        ));
    }

    #[test]
    fn stale_span_detected() {
        let (_, diags) = analyze(RAW, &prelude());
        let plan = plan_repairs(&diags);
        let other = format!("%%\n{RAW}");
        assert!(matches!(
            apply_repairs(&other, &plan[..1]),
            Err(RepairError::StaleSpan { .. })
        ));
    }

    #[test]
    fn fixpoint_on_raw_text() {
        let out = repair_to_fixpoint(RAW, DEFAULT_MAX_PASSES, &prelude()).unwrap();
        assert!(out.remaining.is_empty(), "{:?}\n{}", out.remaining, out.text);
        assert!(out.passes <= 2);
        let rules: Vec<_> = out.log.entries.iter().map(|e| e.rule_id.as_str()).collect();
        assert_eq!(
            rules,
            vec!["rewrite_header", "move_importing_after_begin", "rename_reference"]
        );
        assert_eq!(out.log.replay(RAW).unwrap(), out.text);
        assert!(out.text.starts_with("Mappings: THEORY\nBEGIN\n  IMPORTING sets\n"), "{}", out.text);
    }

    #[test]
    fn clean_text_is_a_fixpoint() {
        let clean = repair_to_fixpoint(RAW, 5, &prelude()).unwrap().text;
        let again = repair_to_fixpoint(&clean, 5, &prelude()).unwrap();
        assert_eq!(again.text, clean);
        assert!(again.log.is_empty());
        assert_eq!(again.passes, 0);
    }

    #[test]
    fn gibberish_passes_through() {
        let out = repair_to_fixpoint("just some prose", 5, &prelude()).unwrap();
        assert_eq!(out.text, "just some prose");
        let codes_left: Vec<_> = out.remaining.iter().map(|d| d.code.as_str()).collect();
        assert_eq!(codes_left, vec![codes::E_PARSE]);
    }

    #[test]
    fn end_name_insert_and_replace() {
        let prelude = prelude();
        let out = repair_to_fixpoint("A: THEORY\nBEGIN\nEND\n", 5, &prelude).unwrap();
        assert_eq!(out.text, "A: THEORY\nBEGIN\nEND A\n");
        let out = repair_to_fixpoint("A: THEORY\nBEGIN\nEND B\n", 5, &prelude).unwrap();
        assert_eq!(out.text, "A: THEORY\nBEGIN\nEND A\n");
    }

    #[test]
    fn max_passes_exceeded_carries_partial_result() {
        // Two early importings both want the region up to BEGIN, so only one
        // moves per pass.
        let text = "A: THEORY\nIMPORTING sets\nIMPORTING booleans\nBEGIN\nEND A\n";
        match repair_to_fixpoint(text, 1, &prelude()) {
            Err(RepairError::MaxPassesExceeded { passes, partial }) => {
                assert_eq!(passes, 1);
                assert_eq!(partial.log.len(), 1);
            }
            other => panic!("{other:?}"),
        }
        let out = repair_to_fixpoint(text, 5, &prelude()).unwrap();
        assert!(out.remaining.iter().all(|d| d.severity != Severity::Error), "{:?}", out.remaining);
    }

    #[test]
    fn every_fixable_code_has_a_rule() {
        for code in [
            codes::E_THEORY_HEADER,
            codes::E_IMPORT_BEFORE_BEGIN,
            codes::E_UNKNOWN_PRELUDE_NAME,
            codes::E_END_NAME_MISMATCH,
        ] {
            assert!(rule_for(code).is_some(), "{code}");
        }
        let mut triggers: Vec<_> = RULES.iter().map(|r| r.triggers_on).collect();
        triggers.dedup();
        assert_eq!(triggers.len(), RULES.len());
    }
}
