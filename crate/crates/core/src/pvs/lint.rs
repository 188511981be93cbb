//! Static checks approximating the typecheck gate on the stub backend.

use super::ast::*;
use super::diagnostic::{codes, Diagnostic, Span};
use super::lexer::{lex, TokenKind};
use super::prelude::PreludeIndex;
use std::collections::{BTreeMap, BTreeSet, HashMap};

pub fn lint(ast: &TheoryAst, prelude: &PreludeIndex) -> Vec<Diagnostic> {
    let mut linter = Linter::new(ast, prelude);
    linter.run();
    let mut diags = linter.diags;
    diags.sort_by_key(|d| (d.span.offset, d.code.clone()));
    diags
}

fn span_of(loc: &Loc) -> Span {
    loc.span().unwrap_or_default()
}

struct Linter<'a> {
    ast: &'a TheoryAst,
    prelude: &'a PreludeIndex,
    locals: BTreeSet<&'a str>,
    arities: HashMap<&'a str, usize>,
    uses: BTreeMap<String, usize>,
    bound: Vec<String>,
    diags: Vec<Diagnostic>,
}

fn declared_arity(kind: &DeclKind) -> Option<usize> {
    match kind {
        DeclKind::Def { params, .. } if !params.is_empty() => {
            Some(params.iter().map(|b| b.names.len()).sum())
        }
        DeclKind::Const { signature } | DeclKind::Var { signature } => match signature {
            TypeExpr::Function { domain, .. } => Some(domain.len()),
            _ => None,
        },
        _ => None,
    }
}

impl<'a> Linter<'a> {
    fn new(ast: &'a TheoryAst, prelude: &'a PreludeIndex) -> Self {
        let mut locals: BTreeSet<&str> = ast.declarations.iter().map(|d| d.name.as_str()).collect();
        locals.extend(ast.formals.iter().map(|f| f.name.as_str()));
        let arities = ast
            .declarations
            .iter()
            .filter_map(|d| declared_arity(&d.kind).map(|a| (d.name.as_str(), a)))
            .collect();
        Linter {
            ast,
            prelude,
            locals,
            arities,
            uses: BTreeMap::new(),
            bound: Vec::new(),
            diags: Vec::new(),
        }
    }

    fn run(&mut self) {
        for imp in &self.ast.importings {
            if !self.prelude.is_theory(&imp.name) {
                self.unknown(&imp.name, &imp.loc, "imported theory");
            }
            for a in &imp.actuals {
                self.type_expr(a);
            }
        }
        for f in &self.ast.formals {
            if let FormalKind::Value(t) = &f.kind {
                self.type_expr(t);
            }
        }

        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for decl in &self.ast.declarations {
            if !seen.insert(decl.name.as_str()) {
                self.diags.push(Diagnostic::error(
                    codes::E_DUP_DECL,
                    span_of(&decl.loc),
                    format!("`{}` is declared more than once", decl.name),
                ));
            }
            self.declaration(decl);
        }

        for decl in &self.ast.declarations {
            if matches!(decl.kind, DeclKind::Formula { .. } | DeclKind::Opaque { .. }) {
                continue;
            }
            if self.uses.get(&decl.name).copied().unwrap_or(0) == 0 {
                self.diags.push(Diagnostic::warning(
                    codes::W_UNUSED_DECL,
                    span_of(&decl.loc),
                    format!("`{}` is never referenced", decl.name),
                ));
            }
        }
    }

    fn unknown(&mut self, name: &str, loc: &Loc, what: &str) {
        let span = span_of(loc);
        let diag = Diagnostic::error(
            codes::E_UNKNOWN_PRELUDE_NAME,
            span,
            format!("{what} `{name}` is not a prelude, local, bound or formal name"),
        );
        self.diags.push(match self.prelude.rename_for(name) {
            Some(to) => diag.fixable(to),
            None => diag,
        });
    }

    fn declaration(&mut self, decl: &'a Declaration) {
        match &decl.kind {
            DeclKind::UninterpretedType { .. } => {}
            DeclKind::TypeDef { definition, .. } => self.type_expr(definition),
            DeclKind::Const { signature } | DeclKind::Var { signature } => self.type_expr(signature),
            DeclKind::Def {
                params,
                signature,
                body,
            } => {
                let mark = self.bound.len();
                self.bindings(params);
                self.type_expr(signature);
                self.expr(body);
                self.bound.truncate(mark);
            }
            DeclKind::Formula { body, .. } => self.expr(body),
            DeclKind::Opaque { text } => {
                // Opaque text is not checked, but the names it mentions count
                // as uses.
                for tok in lex(text).tokens {
                    if tok.kind == TokenKind::Identifier && tok.text != decl.name {
                        *self.uses.entry(tok.text).or_default() += 1;
                    }
                }
            }
        }
    }

    fn bindings(&mut self, bindings: &[Binding]) {
        for b in bindings {
            if let Some(t) = &b.ty {
                self.type_expr(t);
            }
            self.bound.extend(b.names.iter().cloned());
        }
    }

    fn is_bound(&self, name: &str) -> bool {
        self.bound.iter().rev().any(|b| b == name)
    }

    fn reference(&mut self, name: &str, loc: &Loc, what: &str) {
        if self.is_bound(name) {
            return;
        }
        if self.locals.contains(name) {
            *self.uses.entry(name.to_owned()).or_default() += 1;
            return;
        }
        if self.prelude.get(name).is_some() {
            return;
        }
        self.unknown(name, loc, what);
    }

    fn type_expr(&mut self, t: &TypeExpr) {
        match t {
            TypeExpr::Name { name, actuals, loc } => {
                self.reference(name, loc, "type");
                for a in actuals {
                    self.type_expr(a);
                }
            }
            TypeExpr::Function { domain, range } => {
                for d in domain {
                    self.type_expr(d);
                }
                self.type_expr(range);
            }
            TypeExpr::Tuple(items) => {
                for i in items {
                    self.type_expr(i);
                }
            }
            TypeExpr::Subtype {
                var,
                base,
                predicate,
            } => {
                self.type_expr(base);
                self.bound.push(var.clone());
                self.expr(predicate);
                self.bound.pop();
            }
        }
    }

    fn arity_of(&self, name: &str) -> Option<usize> {
        if self.is_bound(name) {
            return None;
        }
        if self.locals.contains(name) {
            return self.arities.get(name).copied();
        }
        self.prelude.get(name).and_then(|e| e.arity)
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Name { name, actuals, loc } => {
                self.reference(name, loc, "name");
                for a in actuals {
                    self.type_expr(a);
                }
            }
            Expr::Number(_) => {}
            Expr::Application { func, args } => {
                if let Expr::Name { name, loc, .. } = func.as_ref() {
                    if let Some(expected) = self.arity_of(name) {
                        if expected != args.len() {
                            self.diags.push(Diagnostic::error(
                                codes::E_ARITY,
                                span_of(loc),
                                format!(
                                    "`{name}` takes {expected} argument(s) but is applied to {}",
                                    args.len()
                                ),
                            ));
                        }
                    }
                }
                self.expr(func);
                for a in args {
                    self.expr(a);
                }
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
            Expr::Tuple(items) => {
                for i in items {
                    self.expr(i);
                }
            }
            Expr::SetComprehension { binding, predicate } => {
                let mark = self.bound.len();
                self.bindings(std::slice::from_ref(binding));
                self.expr(predicate);
                self.bound.truncate(mark);
            }
            Expr::IfThenElse {
                cond,
                then_branch,
                else_branch,
            } => {
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
    use crate::pvs::parser::parse_theory;

    fn lint_text(text: &str) -> Vec<Diagnostic> {
        let out = parse_theory(text);
        lint(out.ast.as_ref().expect("parses"), &PreludeIndex::bundled())
    }

    fn codes_of(d: &[Diagnostic]) -> Vec<&str> {
        d.iter().map(|d| d.code.as_str()).collect()
    }

    #[test]
    fn set_theory_is_unknown_and_fixable() {
        let d = lint_text("A: THEORY\nBEGIN\n  IMPORTING set_theory\nEND A\n");
        assert_eq!(codes_of(&d), vec![codes::E_UNKNOWN_PRELUDE_NAME]);
        assert!(d[0].fixable);
        assert_eq!(d[0].suggestion.as_deref(), Some("sets"));
        assert_eq!(d[0].span.length as usize, "set_theory".len());
    }

    #[test]
    fn clean_use_of_sets() {
        let d = lint_text(
            "A: THEORY\nBEGIN\n  IMPORTING sets\n  T: TYPE\n  s: set[T]\n  \
             l: LEMMA FORALL (x: T): member(x, s) IMPLIES subset?(singleton(x), s)\nEND A\n",
        );
        assert!(d.is_empty(), "{d:?}");
    }

    #[test]
    fn arity_mismatch() {
        let d = lint_text(
            "A: THEORY\nBEGIN\n  T: TYPE\n  f(x: T): bool = TRUE\n  l: LEMMA FORALL (x, y: T): f(x, y)\nEND A\n",
        );
        assert_eq!(codes_of(&d), vec![codes::E_ARITY]);
    }

    #[test]
    fn function_typed_constant_arity() {
        let d = lint_text(
            "A: THEORY\nBEGIN\n  T: TYPE\n  g: [T, T -> bool]\n  l: LEMMA FORALL (x: T): g(x)\nEND A\n",
        );
        assert_eq!(codes_of(&d), vec![codes::E_ARITY]);
    }

    #[test]
    fn duplicates_and_unused() {
        let d = lint_text("A: THEORY\nBEGIN\n  T: TYPE\n  T: TYPE\n  c: nat\nEND A\n");
        assert_eq!(
            codes_of(&d),
            vec![
                codes::W_UNUSED_DECL,
                codes::E_DUP_DECL,
                codes::W_UNUSED_DECL,
                codes::W_UNUSED_DECL
            ]
        );
    }

    #[test]
    fn bound_and_formal_names_resolve() {
        let d = lint_text(
            "A[T: TYPE]: THEORY\nBEGIN\n  p: [T -> bool]\n  \
             l: LEMMA EXISTS (s: set[T]): s = {x: T | p(x)}\nEND A\n",
        );
        assert!(d.is_empty(), "{d:?}");
    }

    #[test]
    fn unknown_name_without_rename_is_not_fixable() {
        let d = lint_text("A: THEORY\nBEGIN\n  l: LEMMA homeomorphic?(x)\nEND A\n");
        assert!(d.iter().all(|d| d.code == codes::E_UNKNOWN_PRELUDE_NAME && !d.fixable));
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn shadowing_disables_arity() {
        let d = lint_text(
            "A: THEORY\nBEGIN\n  T: TYPE\n  f(x: T): bool = TRUE\n  \
             l: LEMMA FORALL (f: [T, T -> bool], x: T): f(x, x)\nEND A\n",
        );
        assert!(codes_of(&d).iter().all(|c| *c != codes::E_ARITY), "{d:?}");
    }
}
