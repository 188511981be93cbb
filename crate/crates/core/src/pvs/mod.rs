//! Front end for a pragmatic subset of the PVS specification language:
//! lexer, recovering parser, canonical printer, linter and prelude index.

pub mod ast;
pub mod diagnostic;
pub mod lexer;
pub mod lint;
pub mod parser;
pub mod prelude;
pub mod printer;

pub use ast::{
    BinOp, Binding, DeclKind, DeclTag, Declaration, Expr, FormalKind, FormalParam, FormulaClass,
    Loc, Quantifier, TheoryAst, TheoryRef, TypeExpr, UnOp,
};
pub use diagnostic::{codes, Diagnostic, LineIndex, Severity, Span};
pub use lexer::{lex, Keyword, Lexed, Token, TokenKind};
pub use lint::lint;
pub use parser::{parse_expr, parse_theory, ParseOutput};
pub use prelude::{EntryKind, PreludeEntry, PreludeIndex};
pub use printer::{print_declaration, print_expr, print_theory, print_theory_ref, print_type, PrintError};

/// Parse and lint in one step. Parse diagnostics come first, then lint
/// diagnostics when an AST was recovered.
pub fn analyze(text: &str, prelude: &PreludeIndex) -> (Option<TheoryAst>, Vec<Diagnostic>) {
    let out = parse_theory(text);
    let mut diags = out.diagnostics;
    if let Some(ast) = &out.ast {
        diags.extend(lint(ast, prelude));
    }
    (out.ast, diags)
}
