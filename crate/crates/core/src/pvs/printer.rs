//! Canonical layout for theories.
//!
//! `Name: THEORY` / `BEGIN` / importings / declarations separated by one
//! blank line / `END Name`, two-space indentation, upper-case keywords.
//! Parentheses are added wherever precedence would otherwise change the
//! tree, so printing any AST and parsing it back yields the same structure
//! modulo those inserted [`Expr::Paren`] nodes.

use super::ast::*;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrintError {
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

pub fn print_theory(ast: &TheoryAst) -> Result<String, PrintError> {
    if ast.end_name != ast.name {
        return Err(PrintError::InvariantViolation(format!(
            "END name `{}` differs from theory name `{}`",
            ast.end_name, ast.name
        )));
    }
    let mut out = String::new();
    out.push_str(&ast.name);
    if !ast.formals.is_empty() {
        out.push('[');
        let formals: Vec<String> = ast.formals.iter().map(print_formal).collect();
        out.push_str(&formals.join(", "));
        out.push(']');
    }
    out.push_str(": THEORY\nBEGIN\n");
    if !ast.importings.is_empty() {
        let refs: Vec<String> = ast.importings.iter().map(print_theory_ref).collect();
        let _ = writeln!(out, "  IMPORTING {}", refs.join(", "));
        if !ast.declarations.is_empty() {
            out.push('\n');
        }
    }
    for (i, decl) in ast.declarations.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str("  ");
        out.push_str(&print_declaration(decl));
        out.push('\n');
    }
    let _ = writeln!(out, "END {}", ast.name);
    Ok(out)
}

fn print_formal(f: &FormalParam) -> String {
    match &f.kind {
        FormalKind::Type { nonempty: false } => format!("{}: TYPE", f.name),
        FormalKind::Type { nonempty: true } => format!("{}: TYPE+", f.name),
        FormalKind::Value(t) => format!("{}: {}", f.name, print_type(t)),
    }
}

pub fn print_theory_ref(r: &TheoryRef) -> String {
    format!("{}{}", r.name, print_actuals(&r.actuals))
}

fn print_actuals(actuals: &[TypeExpr]) -> String {
    if actuals.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = actuals.iter().map(print_type).collect();
    format!("[{}]", parts.join(", "))
}

/// One declaration without leading indentation. Multi-line forms indent
/// continuation lines by four spaces relative to the theory margin.
pub fn print_declaration(decl: &Declaration) -> String {
    let name = &decl.name;
    match &decl.kind {
        DeclKind::UninterpretedType { nonempty } => {
            format!("{name}: {}", if *nonempty { "TYPE+" } else { "TYPE" })
        }
        DeclKind::TypeDef {
            nonempty,
            definition,
        } => format!(
            "{name}: {} = {}",
            if *nonempty { "TYPE+" } else { "TYPE" },
            print_type(definition)
        ),
        DeclKind::Const { signature } => format!("{name}: {}", print_type(signature)),
        DeclKind::Var { signature } => format!("{name}: VAR {}", print_type(signature)),
        DeclKind::Def {
            params,
            signature,
            body,
        } => {
            let params = if params.is_empty() {
                String::new()
            } else {
                format!("({})", print_bindings(params))
            };
            format!(
                "{name}{params}: {} =\n    {}",
                print_type(signature),
                print_expr(body)
            )
        }
        DeclKind::Formula { class, body } => {
            format!("{name}: {}\n    {}", class.as_str(), print_expr(body))
        }
        DeclKind::Opaque { text } => text.clone(),
    }
}

fn print_bindings(bindings: &[Binding]) -> String {
    let groups: Vec<String> = bindings
        .iter()
        .map(|b| match &b.ty {
            Some(t) => format!("{}: {}", b.names.join(", "), print_type(t)),
            None => b.names.join(", "),
        })
        .collect();
    groups.join(", ")
}

pub fn print_type(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Name { name, actuals, .. } => format!("{name}{}", print_actuals(actuals)),
        TypeExpr::Function { domain, range } => {
            let dom: Vec<String> = domain.iter().map(print_type).collect();
            format!("[{} -> {}]", dom.join(", "), print_type(range))
        }
        TypeExpr::Tuple(items) => {
            let parts: Vec<String> = items.iter().map(print_type).collect();
            format!("[{}]", parts.join(", "))
        }
        TypeExpr::Subtype {
            var,
            base,
            predicate,
        } => format!("{{{var}: {} | {}}}", print_type(base), print_expr(predicate)),
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_operand(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Name { name, actuals, .. } => {
            out.push_str(name);
            out.push_str(&print_actuals(actuals));
        }
        Expr::Number(n) => out.push_str(n),
        Expr::Application { func, args } => {
            write_operand(out, func, func.precedence() < 10);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
        Expr::Binder {
            quantifier,
            bindings,
            body,
        } => {
            let _ = write!(out, "{} ({}): ", quantifier.as_str(), print_bindings(bindings));
            write_expr(out, body);
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let lp = lhs.precedence();
            let rp = rhs.precedence();
            write_operand(out, lhs, lp < p || (lp == p && op.right_assoc()));
            let _ = write!(out, " {} ", op.as_str());
            write_operand(out, rhs, rp < p || (rp == p && !op.right_assoc()));
        }
        Expr::Unary { op, operand } => {
            let (text, p) = match op {
                UnOp::Not => ("NOT ", 5),
                UnOp::Neg => ("-", 9),
            };
            out.push_str(text);
            write_operand(out, operand, operand.precedence() < p);
        }
        Expr::Tuple(items) => {
            out.push('(');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item);
            }
            out.push(')');
        }
        Expr::SetComprehension { binding, predicate } => {
            out.push('{');
            out.push_str(&print_bindings(std::slice::from_ref(binding)));
            out.push_str(" | ");
            write_expr(out, predicate);
            out.push('}');
        }
        Expr::IfThenElse {
            cond,
            then_branch,
            else_branch,
        } => {
            out.push_str("IF ");
            write_expr(out, cond);
            out.push_str(" THEN ");
            write_expr(out, then_branch);
            out.push_str(" ELSE ");
            write_expr(out, else_branch);
            out.push_str(" ENDIF");
        }
        Expr::Paren(inner) => {
            out.push('(');
            write_expr(out, inner);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pvs::parser::{parse_expr, parse_theory};

    #[test]
    fn minimal_form() {
        let ast = TheoryAst::new("Mappings");
        assert_eq!(print_theory(&ast).unwrap(), "Mappings: THEORY\nBEGIN\nEND Mappings\n");
    }

    #[test]
    fn end_name_invariant() {
        let mut ast = TheoryAst::new("A");
        ast.end_name = "B".into();
        assert!(matches!(print_theory(&ast), Err(PrintError::InvariantViolation(_))));
    }

    #[test]
    fn canonical_layout() {
        let text = "t: theory begin importing sets t1: type x: var t1 l: lemma x = x end t";
        let ast = parse_theory(text).ast.unwrap();
        assert_eq!(
            print_theory(&ast).unwrap(),
            "t: THEORY\nBEGIN\n  IMPORTING sets\n\n  t1: TYPE\n\n  x: VAR t1\n\n  l: LEMMA\n    x = x\nEND t\n"
        );
    }

    #[test]
    fn parens_inserted_where_needed() {
        let e = Expr::binary(
            BinOp::Mul,
            Expr::binary(BinOp::Add, Expr::name("a"), Expr::name("b")),
            Expr::name("c"),
        );
        assert_eq!(print_expr(&e), "(a + b) * c");
        let e = Expr::binary(
            BinOp::Sub,
            Expr::name("a"),
            Expr::binary(BinOp::Sub, Expr::name("b"), Expr::name("c")),
        );
        assert_eq!(print_expr(&e), "a - (b - c)");
        let e = Expr::binary(
            BinOp::Implies,
            Expr::binary(BinOp::Implies, Expr::name("a"), Expr::name("b")),
            Expr::name("c"),
        );
        assert_eq!(print_expr(&e), "(a IMPLIES b) IMPLIES c");
    }

    #[test]
    fn expression_reprint_is_stable() {
        for src in [
            "FORALL (x: T): p(x) AND NOT q(x)",
            "{x: nat | x > 0 AND x < 10}",
            "IF a THEN b ELSE c ENDIF",
            "-(-1) + f(a, (b, c))",
            "emptyset[T] = x",
            "(LAMBDA (y: T): y)(z)",
        ] {
            let once = print_expr(&parse_expr(src).unwrap());
            let twice = print_expr(&parse_expr(&once).unwrap());
            assert_eq!(once, twice, "{src}");
        }
    }
}
