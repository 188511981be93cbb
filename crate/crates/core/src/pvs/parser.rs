//! Recursive-descent parser for the PVS subset.
//!
//! Three malformed shapes that LLM output commonly takes are recognized and
//! recovered from with fixable diagnostics: a `theory Name` header, an
//! `IMPORTING` clause placed before `BEGIN`, and a missing or wrong name after
//! `END`. Declarations the subset cannot express become [`DeclKind::Opaque`].

use super::ast::*;
use super::diagnostic::{codes, Diagnostic, LineIndex, Span};
use super::lexer::{lex, Keyword, Token, TokenKind};

#[derive(Debug, Clone)]
pub struct ParseOutput {
    pub ast: Option<TheoryAst>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseOutput {
    /// True when an AST was produced without any diagnostics.
    pub fn is_clean(&self) -> bool {
        self.ast.is_some() && self.diagnostics.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

#[derive(Debug)]
struct Fail {
    offset: usize,
    message: String,
}

type PResult<T> = Result<T, Fail>;

pub fn parse_theory(text: &str) -> ParseOutput {
    let lexed = lex(text);
    let mut diagnostics = lexed.diagnostics.clone();
    let tokens = lexed.significant();
    let mut parser = Parser {
        text,
        lines: LineIndex::new(text),
        toks: &tokens,
        pos: 0,
        diags: Vec::new(),
    };
    match parser.theory() {
        Ok(ast) => {
            diagnostics.extend(parser.diags);
            diagnostics.sort_by_key(|d| d.span.offset);
            ParseOutput {
                ast: Some(ast),
                diagnostics,
            }
        }
        Err(fail) => {
            let offset = fail.offset.min(text.len());
            let end = text[offset..]
                .char_indices()
                .nth(1)
                .map(|(i, _)| offset + i)
                .unwrap_or(text.len());
            diagnostics.push(Diagnostic::error(
                codes::E_PARSE,
                parser.lines.span(offset, end),
                fail.message,
            ));
            ParseOutput {
                ast: None,
                diagnostics,
            }
        }
    }
}

/// Parse a standalone expression; used by tests and tools.
pub fn parse_expr(text: &str) -> Result<Expr, Diagnostic> {
    let tokens = lex(text).significant();
    let mut parser = Parser {
        text,
        lines: LineIndex::new(text),
        toks: &tokens,
        pos: 0,
        diags: Vec::new(),
    };
    let result = parser.expr().and_then(|e| match parser.peek() {
        None => Ok(e),
        Some(t) => Err(Fail {
            offset: t.start,
            message: format!("unexpected `{}` after expression", t.text),
        }),
    });
    result.map_err(|f| {
        let offset = f.offset.min(text.len());
        Diagnostic::error(codes::E_PARSE, parser.lines.span(offset, offset), f.message)
    })
}

struct Parser<'a> {
    text: &'a str,
    lines: LineIndex<'a>,
    toks: &'a [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + k)
    }

    fn bump(&mut self) -> &'a Token {
        let t = &self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn eof_offset(&self) -> usize {
        self.toks.last().map(|t| t.end).unwrap_or(0)
    }

    fn fail<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (offset, found) = match self.peek() {
            Some(t) => (t.start, format!("`{}`", t.text)),
            None => (self.eof_offset(), "end of input".to_owned()),
        };
        Err(Fail {
            offset,
            message: format!("{}, found {found}", message.into()),
        })
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_some_and(|t| t.is_op(op))
    }

    fn at_kw(&self, kw: Keyword) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(kw))
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        if self.at_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.fail(format!("expected `{p}`"))
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<&'a Token> {
        if self.at_kw(kw) {
            Ok(self.bump())
        } else {
            self.fail(format!("expected {}", kw.as_str()))
        }
    }

    fn ident(&mut self) -> PResult<(&'a str, Loc)> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Ok((t.text.as_str(), self.loc(t)))
            }
            _ => self.fail("expected identifier"),
        }
    }

    fn loc(&self, t: &Token) -> Loc {
        Loc(Some(self.lines.span(t.start, t.end)))
    }

    fn span_between(&self, first: usize, last: usize) -> Span {
        self.lines.span(self.toks[first].start, self.toks[last].end)
    }

    // ---- theory structure ----

    fn theory(&mut self) -> PResult<TheoryAst> {
        let header_start = self.pos;
        let (name, formals) = if self.at_kw(Keyword::Theory)
            && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier)
        {
            self.bump();
            let (name, _) = self.ident()?;
            let formals_start = self.pos;
            let formals = if self.at_punct("[") { self.formals()? } else { Vec::new() };
            let formals_text = if self.pos > formals_start {
                &self.text[self.toks[formals_start].start..self.toks[self.pos - 1].end]
            } else {
                ""
            };
            self.eat_punct(":");
            let span = self.span_between(header_start, self.pos - 1);
            self.diags.push(
                Diagnostic::error(
                    codes::E_THEORY_HEADER,
                    span,
                    format!("theory header must be written `{name}: THEORY`"),
                )
                .fixable(format!("{name}{formals_text}: THEORY")),
            );
            (name, formals)
        } else {
            let (name, _) = self.ident()?;
            let formals = if self.at_punct("[") { self.formals()? } else { Vec::new() };
            self.expect_punct(":")?;
            self.expect_kw(Keyword::Theory)?;
            (name, formals)
        };

        let mut ast = TheoryAst::new(name);
        ast.formals = formals;

        let mut early: Vec<Span> = Vec::new();
        while self.at_kw(Keyword::Importing) {
            let start = self.pos;
            let refs = self.importing()?;
            early.push(self.span_between(start, self.pos - 1));
            ast.importings.extend(refs);
        }
        let begin = self.expect_kw(Keyword::Begin)?;
        let begin_span = self.lines.span(begin.start, begin.end);
        for span in early {
            self.diags.push(
                Diagnostic::error(
                    codes::E_IMPORT_BEFORE_BEGIN,
                    span,
                    "IMPORTING must appear after BEGIN",
                )
                .fixable("move after BEGIN")
                .with_anchor(begin_span),
            );
        }

        loop {
            match self.peek() {
                None => return self.fail("expected END"),
                Some(t) if t.is_keyword(Keyword::End) => break,
                Some(t) if t.is_keyword(Keyword::Importing) => {
                    let refs = self.importing()?;
                    ast.importings.extend(refs);
                }
                Some(_) => {
                    let decls = self.declaration_chunk()?;
                    ast.declarations.extend(decls);
                }
            }
        }

        let end_tok = self.bump();
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                ast.end_name = t.text.clone();
                if t.text != ast.name {
                    self.diags.push(
                        Diagnostic::error(
                            codes::E_END_NAME_MISMATCH,
                            self.lines.span(t.start, t.end),
                            format!("END names `{}` but the theory is `{}`", t.text, ast.name),
                        )
                        .fixable(ast.name.clone()),
                    );
                }
            }
            _ => {
                ast.end_name = String::new();
                self.diags.push(
                    Diagnostic::error(
                        codes::E_END_NAME_MISMATCH,
                        self.lines.span(end_tok.end, end_tok.end),
                        format!("END must repeat the theory name `{}`", ast.name),
                    )
                    .fixable(ast.name.clone()),
                );
            }
        }
        if self.peek().is_some() {
            return self.fail("unexpected text after END");
        }
        Ok(ast)
    }

    fn formals(&mut self) -> PResult<Vec<FormalParam>> {
        self.expect_punct("[")?;
        let mut out = Vec::new();
        loop {
            let mut names = vec![self.ident()?.0.to_owned()];
            while self.eat_punct(",") {
                names.push(self.ident()?.0.to_owned());
            }
            self.expect_punct(":")?;
            let kind = if self.eat_kw(Keyword::Type) {
                FormalKind::Type {
                    nonempty: self.eat_op("+"),
                }
            } else if self.eat_kw(Keyword::NonemptyType) {
                FormalKind::Type { nonempty: true }
            } else {
                FormalKind::Value(self.type_expr()?)
            };
            for name in names {
                out.push(FormalParam {
                    name,
                    kind: kind.clone(),
                });
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct("]")?;
        Ok(out)
    }

    fn importing(&mut self) -> PResult<Vec<TheoryRef>> {
        self.expect_kw(Keyword::Importing)?;
        let mut refs = Vec::new();
        loop {
            let (name, loc) = self.ident()?;
            let actuals = if self.at_punct("[") { self.actuals()? } else { Vec::new() };
            refs.push(TheoryRef {
                name: name.to_owned(),
                actuals,
                loc,
            });
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(refs)
    }

    // ---- declarations ----

    /// True when the token at `i` can start a declaration: an identifier
    /// followed by `:`, by `, name, ... :`, or by a parenthesized parameter
    /// list and `:`. Identifiers right after a binder keyword or a comma are
    /// bound variables, not declarations.
    fn is_decl_start(&self, i: usize) -> bool {
        let toks = self.toks;
        if toks.get(i).map(|t| t.kind) != Some(TokenKind::Identifier) {
            return false;
        }
        if i > 0 {
            let prev = &toks[i - 1];
            if prev.is_punct(",")
                || prev.is_keyword(Keyword::Forall)
                || prev.is_keyword(Keyword::Exists)
                || prev.is_keyword(Keyword::Lambda)
            {
                return false;
            }
        }
        let Some(next) = toks.get(i + 1) else {
            return false;
        };
        if next.is_punct(":") {
            return true;
        }
        if next.is_punct(",") {
            let mut j = i + 1;
            while toks.get(j).is_some_and(|t| t.is_punct(","))
                && toks.get(j + 1).is_some_and(|t| t.kind == TokenKind::Identifier)
            {
                j += 2;
            }
            return toks.get(j).is_some_and(|t| t.is_punct(":"));
        }
        if next.is_punct("(") {
            let mut depth = 0usize;
            let mut j = i + 1;
            while let Some(t) = toks.get(j) {
                if t.is_punct("(") {
                    depth += 1;
                } else if t.is_punct(")") {
                    depth -= 1;
                    if depth == 0 {
                        return toks.get(j + 1).is_some_and(|t| t.is_punct(":"));
                    }
                }
                j += 1;
            }
        }
        false
    }

    fn at_boundary(&self) -> bool {
        match self.peek() {
            None => true,
            Some(t) if t.is_keyword(Keyword::End) || t.is_keyword(Keyword::Importing) => true,
            Some(_) => self.is_decl_start(self.pos),
        }
    }

    fn declaration_chunk(&mut self) -> PResult<Vec<Declaration>> {
        let start = self.pos;
        let saved = self.diags.len();
        if let Ok(decls) = self.declaration() {
            if self.at_boundary() {
                return Ok(decls);
            }
        }
        self.diags.truncate(saved);
        self.pos = start + 1;
        let mut depth = 0i32;
        loop {
            match self.peek() {
                None => break,
                Some(t) => {
                    if depth <= 0 && self.at_boundary() {
                        break;
                    }
                    if t.is_punct("(") || t.is_punct("[") || t.is_punct("{") {
                        depth += 1;
                    } else if t.is_punct(")") || t.is_punct("]") || t.is_punct("}") {
                        depth -= 1;
                    }
                    self.pos += 1;
                }
            }
        }
        let first = &self.toks[start];
        let last = &self.toks[self.pos - 1];
        let text = self.text[first.start..last.end].to_owned();
        let name = if first.kind == TokenKind::Identifier {
            first.text.clone()
        } else {
            format!("<opaque@{}>", first.start)
        };
        let span = self.lines.span(first.start, last.end);
        self.diags.push(Diagnostic::warning(
            codes::W_OPAQUE_DECL,
            span,
            format!("declaration `{name}` is outside the supported subset and is kept verbatim"),
        ));
        Ok(vec![Declaration {
            name,
            kind: DeclKind::Opaque { text },
            loc: Loc(Some(span)),
        }])
    }

    fn declaration(&mut self) -> PResult<Vec<Declaration>> {
        let (first, first_loc) = self.ident()?;
        let mut names = vec![(first.to_owned(), first_loc)];
        while self.eat_punct(",") {
            let (n, l) = self.ident()?;
            names.push((n.to_owned(), l));
        }
        let params = if names.len() == 1 && self.at_punct("(") {
            Some(self.paren_bindings()?)
        } else {
            None
        };
        self.expect_punct(":")?;

        let single = |parser: &Self, what: &str| -> PResult<()> {
            if names.len() > 1 {
                return parser.fail(format!("{what} declarations take a single name"));
            }
            Ok(())
        };
        let no_params = |parser: &Self, what: &str| -> PResult<()> {
            if params.is_some() {
                return parser.fail(format!("{what} declarations take no parameters"));
            }
            Ok(())
        };

        let kinds: Vec<DeclKind> = if self.at_kw(Keyword::Type) || self.at_kw(Keyword::NonemptyType) {
            no_params(self, "type")?;
            let nonempty = if self.eat_kw(Keyword::NonemptyType) {
                true
            } else {
                self.bump();
                self.eat_op("+")
            };
            if self.eat_op("=") {
                single(self, "type")?;
                vec![DeclKind::TypeDef {
                    nonempty,
                    definition: self.type_expr()?,
                }]
            } else {
                vec![DeclKind::UninterpretedType { nonempty }; names.len()]
            }
        } else if self.eat_kw(Keyword::Var) {
            no_params(self, "variable")?;
            let sig = self.type_expr()?;
            vec![DeclKind::Var { signature: sig }; names.len()]
        } else if let Some(class) = self.peek().and_then(formula_class) {
            no_params(self, "formula")?;
            single(self, "formula")?;
            self.bump();
            vec![DeclKind::Formula {
                class,
                body: self.expr()?,
            }]
        } else {
            let signature = self.type_expr()?;
            if self.eat_op("=") {
                single(self, "definition")?;
                vec![DeclKind::Def {
                    params: params.clone().unwrap_or_default(),
                    signature,
                    body: self.expr()?,
                }]
            } else {
                no_params(self, "constant")?;
                vec![DeclKind::Const { signature }; names.len()]
            }
        };

        Ok(names
            .into_iter()
            .zip(kinds)
            .map(|((name, loc), kind)| Declaration { name, kind, loc })
            .collect())
    }

    // ---- bindings ----

    /// `(x, y: T, z)`.
    fn paren_bindings(&mut self) -> PResult<Vec<Binding>> {
        self.expect_punct("(")?;
        let mut groups = Vec::new();
        let mut names = Vec::new();
        loop {
            names.push(self.ident()?.0.to_owned());
            if self.eat_punct(":") {
                let ty = self.type_expr()?;
                groups.push(Binding {
                    names: std::mem::take(&mut names),
                    ty: Some(ty),
                });
                if self.eat_punct(",") {
                    continue;
                }
                break;
            }
            if self.eat_punct(",") {
                continue;
            }
            groups.push(Binding {
                names: std::mem::take(&mut names),
                ty: None,
            });
            break;
        }
        self.expect_punct(")")?;
        Ok(groups)
    }

    // ---- types ----

    fn actuals(&mut self) -> PResult<Vec<TypeExpr>> {
        self.expect_punct("[")?;
        let mut out = vec![self.type_expr()?];
        while self.eat_punct(",") {
            out.push(self.type_expr()?);
        }
        self.expect_punct("]")?;
        Ok(out)
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        if self.eat_punct("[") {
            let mut items = vec![self.type_expr()?];
            while self.eat_punct(",") {
                items.push(self.type_expr()?);
            }
            if self.eat_op("->") {
                let range = self.type_expr()?;
                self.expect_punct("]")?;
                return Ok(TypeExpr::Function {
                    domain: items,
                    range: Box::new(range),
                });
            }
            self.expect_punct("]")?;
            if items.len() < 2 {
                return self.fail("a tuple type needs at least two components");
            }
            return Ok(TypeExpr::Tuple(items));
        }
        if self.eat_punct("{") {
            let (var, _) = self.ident()?;
            self.expect_punct(":")?;
            let base = self.type_expr()?;
            self.expect_punct("|")?;
            let predicate = self.expr()?;
            self.expect_punct("}")?;
            return Ok(TypeExpr::Subtype {
                var: var.to_owned(),
                base: Box::new(base),
                predicate: Box::new(predicate),
            });
        }
        let (name, loc) = self.ident()?;
        let actuals = if self.at_punct("[") { self.actuals()? } else { Vec::new() };
        Ok(TypeExpr::Name {
            name: name.to_owned(),
            actuals,
            loc,
        })
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        self.iff()
    }

    fn iff(&mut self) -> PResult<Expr> {
        let mut lhs = self.implies()?;
        while self.eat_kw(Keyword::Iff) || self.eat_op("<=>") {
            let rhs = self.implies()?;
            lhs = Expr::binary(BinOp::Iff, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if self.eat_kw(Keyword::Implies) || self.eat_op("=>") {
            let rhs = self.implies()?;
            return Ok(Expr::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        while self.eat_kw(Keyword::Or) {
            let rhs = self.and()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.not()?;
        while self.eat_kw(Keyword::And) || self.eat_op("&") {
            let rhs = self.not()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.eat_kw(Keyword::Not) {
            let operand = self.not()?;
            return Ok(Expr::Unary {
                op: UnOp::Not,
                operand: Box::new(operand),
            });
        }
        self.relational()
    }

    fn relational(&mut self) -> PResult<Expr> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Some(t) if t.kind == TokenKind::Operator => match t.text.as_str() {
                    "=" => BinOp::Eq,
                    "/=" => BinOp::Neq,
                    "<" => BinOp::Lt,
                    "<=" => BinOp::Le,
                    ">" => BinOp::Gt,
                    ">=" => BinOp::Ge,
                    _ => break,
                },
                _ => break,
            };
            self.pos += 1;
            let rhs = self.additive()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.eat_op("+") {
                BinOp::Add
            } else if self.eat_op("-") {
                BinOp::Sub
            } else {
                break;
            };
            let rhs = self.multiplicative()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_op("*") {
                BinOp::Mul
            } else if self.eat_op("/") {
                BinOp::Div
            } else {
                break;
            };
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_op("-") {
            let operand = self.unary()?;
            return Ok(Expr::Unary {
                op: UnOp::Neg,
                operand: Box::new(operand),
            });
        }
        let mut e = self.primary()?;
        while self.at_punct("(") {
            self.bump();
            let mut args = vec![self.expr()?];
            while self.eat_punct(",") {
                args.push(self.expr()?);
            }
            self.expect_punct(")")?;
            e = Expr::Application {
                func: Box::new(e),
                args,
            };
        }
        Ok(e)
    }

    fn binder_bindings(&mut self) -> PResult<Vec<Binding>> {
        if self.at_punct("(") {
            return self.paren_bindings();
        }
        let mut names = vec![self.ident()?.0.to_owned()];
        while self.eat_punct(",") {
            names.push(self.ident()?.0.to_owned());
        }
        Ok(vec![Binding { names, ty: None }])
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek() else {
            return self.fail("expected expression");
        };
        match tok.kind {
            TokenKind::Identifier => {
                self.pos += 1;
                let actuals = if self.at_punct("[") { self.actuals()? } else { Vec::new() };
                Ok(Expr::Name {
                    name: tok.text.clone(),
                    actuals,
                    loc: self.loc(tok),
                })
            }
            TokenKind::Number => {
                self.pos += 1;
                Ok(Expr::Number(tok.text.clone()))
            }
            TokenKind::Keyword(kw @ (Keyword::Forall | Keyword::Exists | Keyword::Lambda)) => {
                self.pos += 1;
                let quantifier = match kw {
                    Keyword::Forall => Quantifier::Forall,
                    Keyword::Exists => Quantifier::Exists,
                    _ => Quantifier::Lambda,
                };
                let bindings = self.binder_bindings()?;
                self.expect_punct(":")?;
                let body = self.expr()?;
                Ok(Expr::Binder {
                    quantifier,
                    bindings,
                    body: Box::new(body),
                })
            }
            TokenKind::Keyword(Keyword::If) => {
                self.pos += 1;
                let cond = self.expr()?;
                self.expect_kw(Keyword::Then)?;
                let then_branch = self.expr()?;
                self.expect_kw(Keyword::Else)?;
                let else_branch = self.expr()?;
                self.expect_kw(Keyword::Endif)?;
                Ok(Expr::IfThenElse {
                    cond: Box::new(cond),
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                })
            }
            TokenKind::Punctuation if tok.text == "(" => {
                self.pos += 1;
                let first = self.expr()?;
                if self.eat_punct(")") {
                    return Ok(Expr::Paren(Box::new(first)));
                }
                let mut items = vec![first];
                while self.eat_punct(",") {
                    items.push(self.expr()?);
                }
                self.expect_punct(")")?;
                Ok(Expr::Tuple(items))
            }
            TokenKind::Punctuation if tok.text == "{" => {
                self.pos += 1;
                let mut names = vec![self.ident()?.0.to_owned()];
                while self.eat_punct(",") {
                    names.push(self.ident()?.0.to_owned());
                }
                let ty = if self.eat_punct(":") { Some(self.type_expr()?) } else { None };
                self.expect_punct("|")?;
                let predicate = self.expr()?;
                self.expect_punct("}")?;
                Ok(Expr::SetComprehension {
                    binding: Binding { names, ty },
                    predicate: Box::new(predicate),
                })
            }
            _ => self.fail("expected expression"),
        }
    }
}

fn formula_class(t: &Token) -> Option<FormulaClass> {
    match t.kind {
        TokenKind::Keyword(Keyword::Axiom) => Some(FormulaClass::Axiom),
        TokenKind::Keyword(Keyword::Lemma) => Some(FormulaClass::Lemma),
        TokenKind::Keyword(Keyword::Theorem) => Some(FormulaClass::Theorem),
        TokenKind::Keyword(Keyword::Proposition) => Some(FormulaClass::Proposition),
        TokenKind::Keyword(Keyword::Corollary) => Some(FormulaClass::Corollary),
        TokenKind::Keyword(Keyword::Obligation) => Some(FormulaClass::Obligation),
        _ => None,
    }
}
