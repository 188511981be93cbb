//! Merging per-statement theories into one theory.

use crate::pvs::{lex, print_declaration, print_theory_ref, Binding, DeclKind, Declaration, Expr, FormalParam,
    TheoryAst, TokenKind, TypeExpr};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    pub target_name: String,
    /// In dependency order.
    pub source_theories: Vec<TheoryAst>,
    /// (theory name, declaration name) to the new name for a collision.
    #[serde(default)]
    pub rename_map: BTreeMap<(String, String), String>,
}

impl MergePlan {
    pub fn new(target_name: impl Into<String>, source_theories: Vec<TheoryAst>) -> MergePlan {
        MergePlan {
            target_name: target_name.into(),
            source_theories,
            rename_map: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MergeNote {
    /// An exact duplicate of a declaration already merged.
    Dedup { theory: String, decl: String, kept_from: String },
    Rename { theory: String, from: String, to: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MergeError {
    #[error("cannot rename `{decl}` of theory `{theory}`: opaque text would need rewriting")]
    UnresolvableCollision { theory: String, decl: String },
    #[error("invalid rename map entry for `{decl}` of `{theory}`: {reason}")]
    InvalidRenameMap { theory: String, decl: String, reason: String },
    #[error("formal parameter `{0}` is declared differently by two sources")]
    FormalConflict(String),
    #[error("nothing to merge")]
    NoSources,
}

/// `name_k`, keeping a trailing `?` at the end: `f?` becomes `f_2?`.
fn suffixed(name: &str, k: usize) -> String {
    match name.strip_suffix('?') {
        Some(base) => format!("{base}_{k}?"),
        None => format!("{name}_{k}"),
    }
}

fn opaque_mentions(text: &str, names: &BTreeSet<&str>) -> bool {
    lex(text)
        .tokens
        .iter()
        .any(|t| t.kind == TokenKind::Identifier && names.contains(t.text.as_str()))
}

pub fn merge(plan: &MergePlan) -> Result<(TheoryAst, Vec<MergeNote>), MergeError> {
    if plan.source_theories.is_empty() {
        return Err(MergeError::NoSources);
    }
    let all_source_names: BTreeSet<&str> = plan
        .source_theories
        .iter()
        .flat_map(|t| t.declarations.iter().map(|d| d.name.as_str()))
        .collect();
    let mut seen_values = BTreeSet::new();
    for ((theory, decl), new) in &plan.rename_map {
        let reason = if all_source_names.contains(new.as_str()) {
            Some("target name is already declared by a source")
        } else if !seen_values.insert(new) {
            Some("target name is used twice")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(MergeError::InvalidRenameMap {
                theory: theory.clone(),
                decl: decl.clone(),
                reason: reason.into(),
            });
        }
    }

    let mut out = TheoryAst::new(plan.target_name.clone());
    let mut notes = Vec::new();
    let mut taken: BTreeSet<String> = all_source_names.iter().map(|s| s.to_string()).collect();
    taken.extend(plan.rename_map.values().cloned());
    // Which source produced each merged declaration.
    let mut origin: BTreeMap<String, String> = BTreeMap::new();
    let mut imported: BTreeSet<String> = BTreeSet::new();

    for src in &plan.source_theories {
        merge_formals(&mut out.formals, &src.formals)?;
        for imp in &src.importings {
            if imported.insert(print_theory_ref(imp)) {
                out.importings.push(imp.clone());
            }
        }

        let mut renames: BTreeMap<String, String> = BTreeMap::new();
        let mut kept: Vec<Declaration> = Vec::new();
        for decl in &src.declarations {
            let mut d = decl.clone();
            rename_refs_in_decl(&mut d, &renames);
            let Some(existing) = out.declaration(&d.name) else {
                origin.insert(d.name.clone(), src.name.clone());
                out.declarations.push(d.clone());
                kept.push(d);
                continue;
            };
            let duplicate = !d.kind.is_formula()
                && !matches!(d.kind, DeclKind::Opaque { .. })
                && print_declaration(existing) == print_declaration(&d);
            if duplicate {
                notes.push(MergeNote::Dedup {
                    theory: src.name.clone(),
                    decl: d.name.clone(),
                    kept_from: origin.get(&d.name).cloned().unwrap_or_default(),
                });
                continue;
            }
            if matches!(d.kind, DeclKind::Opaque { .. }) {
                return Err(MergeError::UnresolvableCollision {
                    theory: src.name.clone(),
                    decl: d.name.clone(),
                });
            }
            let new_name = match plan.rename_map.get(&(src.name.clone(), d.name.clone())) {
                Some(n) => n.clone(),
                None => (2..)
                    .map(|k| suffixed(&d.name, k))
                    .find(|n| !taken.contains(n))
                    .expect("suffixes are unbounded"),
            };
            taken.insert(new_name.clone());
            notes.push(MergeNote::Rename {
                theory: src.name.clone(),
                from: d.name.clone(),
                to: new_name.clone(),
            });
            renames.insert(d.name.clone(), new_name.clone());
            d.name = new_name;
            origin.insert(d.name.clone(), src.name.clone());
            out.declarations.push(d.clone());
            kept.push(d);
        }

        if !renames.is_empty() {
            let renamed: BTreeSet<&str> = renames.keys().map(String::as_str).collect();
            for d in &kept {
                if let DeclKind::Opaque { text } = &d.kind {
                    if opaque_mentions(text, &renamed) {
                        return Err(MergeError::UnresolvableCollision {
                            theory: src.name.clone(),
                            decl: d.name.clone(),
                        });
                    }
                }
            }
        }
    }
    out.end_name = out.name.clone();
    Ok((out, notes))
}

fn merge_formals(into: &mut Vec<FormalParam>, from: &[FormalParam]) -> Result<(), MergeError> {
    for f in from {
        match into.iter().find(|g| g.name == f.name) {
            Some(g) if g == f => {}
            Some(_) => return Err(MergeError::FormalConflict(f.name.clone())),
            None => into.push(f.clone()),
        }
    }
    Ok(())
}

/// Rewrite free references to renamed names, respecting binders.
pub fn rename_refs_in_decl(d: &mut Declaration, renames: &BTreeMap<String, String>) {
    if renames.is_empty() {
        return;
    }
    let mut r = Renamer { renames, bound: Vec::new() };
    match &mut d.kind {
        DeclKind::UninterpretedType { .. } | DeclKind::Opaque { .. } => {}
        DeclKind::TypeDef { definition, .. } => r.ty(definition),
        DeclKind::Const { signature } | DeclKind::Var { signature } => r.ty(signature),
        DeclKind::Def { params, signature, body } => {
            let mark = r.bound.len();
            r.bindings(params);
            r.ty(signature);
            r.expr(body);
            r.bound.truncate(mark);
        }
        DeclKind::Formula { body, .. } => r.expr(body),
    }
}

struct Renamer<'a> {
    renames: &'a BTreeMap<String, String>,
    bound: Vec<String>,
}

impl Renamer<'_> {
    fn name(&self, name: &mut String) {
        if self.bound.iter().any(|b| b == name) {
            return;
        }
        if let Some(new) = self.renames.get(name.as_str()) {
            *name = new.clone();
        }
    }

    fn bindings(&mut self, bs: &mut [Binding]) {
        for b in bs {
            if let Some(t) = &mut b.ty {
                self.ty(t);
            }
            self.bound.extend(b.names.iter().cloned());
        }
    }

    fn ty(&mut self, t: &mut TypeExpr) {
        match t {
            TypeExpr::Name { name, actuals, .. } => {
                self.name(name);
                for a in actuals {
                    self.ty(a);
                }
            }
            TypeExpr::Function { domain, range } => {
                for d in domain {
                    self.ty(d);
                }
                self.ty(range);
            }
            TypeExpr::Tuple(items) => items.iter_mut().for_each(|i| self.ty(i)),
            TypeExpr::Subtype { var, base, predicate } => {
                self.ty(base);
                self.bound.push(var.clone());
                self.expr(predicate);
                self.bound.pop();
            }
        }
    }

    fn expr(&mut self, e: &mut Expr) {
        match e {
            Expr::Name { name, actuals, .. } => {
                self.name(name);
                for a in actuals {
                    self.ty(a);
                }
            }
            Expr::Number(_) => {}
            Expr::Application { func, args } => {
                self.expr(func);
                args.iter_mut().for_each(|a| self.expr(a));
            }
            Expr::Binder { bindings, body, .. } => {
                let mark = self.bound.len();
                self.bindings(bindings);
                self.expr(body);
                self.bound.truncate(mark);
            }
            Expr::Binary { lhs, rhs, .. } => {
                self.expr(lhs);
                self.expr(rhs);
            }
            Expr::Unary { operand, .. } => self.expr(operand),
            Expr::Tuple(items) => items.iter_mut().for_each(|i| self.expr(i)),
            Expr::SetComprehension { binding, predicate } => {
                let mark = self.bound.len();
                self.bindings(std::slice::from_mut(binding));
                self.expr(predicate);
                self.bound.truncate(mark);
            }
            Expr::IfThenElse { cond, then_branch, else_branch } => {
                self.expr(cond);
                self.expr(then_branch);
                self.expr(else_branch);
            }
            Expr::Paren(inner) => self.expr(inner),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pvs::{analyze, parse_theory, print_theory, PreludeIndex};

    fn ast(text: &str) -> TheoryAst {
        let out = parse_theory(text);
        assert!(out.is_clean(), "{:?}", out.diagnostics);
        out.ast.unwrap()
    }

    const A: &str = "A: THEORY\nBEGIN\n  IMPORTING functions\n  T: TYPE\n  f: [T -> T]\n  \
                     a1: AXIOM bijective?(f)\nEND A\n";
    const B: &str = "B: THEORY\nBEGIN\n  IMPORTING functions, sets\n  T: TYPE\n  f: [T -> T]\n  \
                     b1: LEMMA bijective?(f)\nEND B\n";

    #[test]
    fn identical_declarations_deduplicate() {
        let (m, notes) = merge(&MergePlan::new("M", vec![ast(A), ast(B)])).unwrap();
        let names: Vec<_> = m.declarations.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, vec!["T", "f", "a1", "b1"]);
        assert_eq!(notes.len(), 2);
        assert!(notes.iter().all(|n| matches!(n, MergeNote::Dedup { kept_from, .. } if kept_from == "A")));
        let imports: Vec<_> = m.importings.iter().map(|i| i.name.as_str()).collect();
        assert_eq!(imports, vec!["functions", "sets"]);
        let (_, diags) = analyze(&print_theory(&m).unwrap(), &PreludeIndex::bundled());
        assert!(diags.is_empty(), "{diags:?}");
    }

    #[test]
    fn single_theory_only_renames_header() {
        let (m, notes) = merge(&MergePlan::new("M", vec![ast(A)])).unwrap();
        assert!(notes.is_empty());
        assert_eq!(print_theory(&m).unwrap(), print_theory(&ast(A)).unwrap().replace("A: THEORY", "M: THEORY").replace("END A", "END M"));
    }

    #[test]
    fn conflicting_names_get_suffix_and_references_follow() {
        let x = ast("X: THEORY\nBEGIN\n  h: [nat -> nat]\n  x1: LEMMA h(1) = 1\nEND X\n");
        let y = ast("Y: THEORY\nBEGIN\n  h: [nat -> bool]\n  y1: LEMMA h(2) AND (FORALL (h: nat): h = h)\nEND Y\n");
        let (m, notes) = merge(&MergePlan::new("M", vec![x, y])).unwrap();
        assert_eq!(notes, vec![MergeNote::Rename { theory: "Y".into(), from: "h".into(), to: "h_2".into() }]);
        let text = print_theory(&m).unwrap();
        assert!(text.contains("h_2: [nat -> bool]"), "{text}");
        assert!(text.contains("h_2(2) AND (FORALL (h: nat): h = h)"), "{text}");
        assert!(text.contains("h(1) = 1"));
    }

    #[test]
    fn equal_formulas_are_renamed_not_deduplicated() {
        let p = ast("P: THEORY\nBEGIN\n  l: LEMMA TRUE\nEND P\n");
        let q = ast("Q: THEORY\nBEGIN\n  l: LEMMA TRUE\nEND Q\n");
        let (m, notes) = merge(&MergePlan::new("M", vec![p, q])).unwrap();
        assert_eq!(m.declarations.len(), 2);
        assert_eq!(m.declarations[1].name, "l_2");
        assert!(matches!(notes[0], MergeNote::Rename { .. }));
    }

    #[test]
    fn predicate_suffix_goes_before_question_mark() {
        assert_eq!(suffixed("f?", 2), "f_2?");
        assert_eq!(suffixed("f", 3), "f_3");
    }

    #[test]
    fn rename_map_is_honored_and_validated() {
        let x = ast("X: THEORY\nBEGIN\n  h: nat\n  l: LEMMA h = 1\nEND X\n");
        let y = ast("Y: THEORY\nBEGIN\n  h: bool\n  k: LEMMA h\nEND Y\n");
        let mut plan = MergePlan::new("M", vec![x, y]);
        plan.rename_map.insert(("Y".into(), "h".into()), "hy".into());
        let (m, _) = merge(&plan).unwrap();
        assert!(print_theory(&m).unwrap().contains("hy: bool"));
        plan.rename_map.insert(("Y".into(), "h".into()), "l".into());
        assert!(matches!(merge(&plan), Err(MergeError::InvalidRenameMap { .. })));
    }

    #[test]
    fn opaque_collision_is_unresolvable() {
        let x = ast("X: THEORY\nBEGIN\n  h: nat\n  l: LEMMA h = 1\nEND X\n");
        let y_text = "Y: THEORY\nBEGIN\n  h: bool\n  j: JUDGEMENT h HAS_TYPE bool\nEND Y\n";
        let y = parse_theory(y_text).ast.unwrap();
        assert!(matches!(y.declarations[1].kind, DeclKind::Opaque { .. }));
        assert!(matches!(
            merge(&MergePlan::new("M", vec![x, y])),
            Err(MergeError::UnresolvableCollision { .. })
        ));
    }

    #[test]
    fn empty_plan() {
        assert_eq!(merge(&MergePlan::new("M", vec![])), Err(MergeError::NoSources));
    }
}
