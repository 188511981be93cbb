//! Syntax tree for the supported PVS subset.
//!
//! Source locations ride along in [`Loc`], which compares equal to every
//! other `Loc` so that structural equality ignores layout.

use super::diagnostic::Span;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Source location of a node. Always equal under `==`.
#[derive(Clone, Copy, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Loc(pub Option<Span>);

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}

impl Eq for Loc {}

impl fmt::Debug for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(s) => write!(f, "@{}:{}", s.line, s.column),
            None => write!(f, "@?"),
        }
    }
}

impl Loc {
    pub fn none() -> Loc {
        Loc(None)
    }

    pub fn span(&self) -> Option<Span> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoryAst {
    pub name: String,
    #[serde(default)]
    pub formals: Vec<FormalParam>,
    #[serde(default)]
    pub importings: Vec<TheoryRef>,
    #[serde(default)]
    pub declarations: Vec<Declaration>,
    pub end_name: String,
}

impl TheoryAst {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        TheoryAst {
            end_name: name.clone(),
            name,
            formals: Vec::new(),
            importings: Vec::new(),
            declarations: Vec::new(),
        }
    }

    pub fn declaration(&self, name: &str) -> Option<&Declaration> {
        self.declarations.iter().find(|d| d.name == name)
    }

    /// Names of formula declarations in order.
    pub fn formula_names(&self) -> impl Iterator<Item = &str> {
        self.declarations
            .iter()
            .filter(|d| matches!(d.kind, DeclKind::Formula { .. }))
            .map(|d| d.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalParam {
    pub name: String,
    pub kind: FormalKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormalKind {
    Type { nonempty: bool },
    Value(TypeExpr),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoryRef {
    pub name: String,
    #[serde(default)]
    pub actuals: Vec<TypeExpr>,
    #[serde(default, skip_serializing)]
    pub loc: Loc,
}

impl TheoryRef {
    pub fn named(name: impl Into<String>) -> Self {
        TheoryRef {
            name: name.into(),
            actuals: Vec::new(),
            loc: Loc::none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub name: String,
    pub kind: DeclKind,
    #[serde(default, skip_serializing)]
    pub loc: Loc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclTag {
    TypeDecl,
    UninterpretedType,
    ConstDecl,
    VarDecl,
    DefDecl,
    FormulaDecl,
    Opaque,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FormulaClass {
    Axiom,
    Lemma,
    Theorem,
    Proposition,
    Corollary,
    Obligation,
}

impl FormulaClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaClass::Axiom => "AXIOM",
            FormulaClass::Lemma => "LEMMA",
            FormulaClass::Theorem => "THEOREM",
            FormulaClass::Proposition => "PROPOSITION",
            FormulaClass::Corollary => "COROLLARY",
            FormulaClass::Obligation => "OBLIGATION",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclKind {
    /// `T: TYPE` or `T: TYPE+`.
    UninterpretedType { nonempty: bool },
    /// `T: TYPE = texpr`.
    TypeDef { nonempty: bool, definition: TypeExpr },
    /// `c: texpr`.
    Const { signature: TypeExpr },
    /// `x: VAR texpr`.
    Var { signature: TypeExpr },
    /// `f(params): texpr = body`, params possibly empty.
    Def {
        params: Vec<Binding>,
        signature: TypeExpr,
        body: Expr,
    },
    /// `name: LEMMA body`.
    Formula { class: FormulaClass, body: Expr },
    /// A declaration outside the supported subset, kept verbatim.
    Opaque { text: String },
}

impl DeclKind {
    pub fn tag(&self) -> DeclTag {
        match self {
            DeclKind::UninterpretedType { .. } => DeclTag::UninterpretedType,
            DeclKind::TypeDef { .. } => DeclTag::TypeDecl,
            DeclKind::Const { .. } => DeclTag::ConstDecl,
            DeclKind::Var { .. } => DeclTag::VarDecl,
            DeclKind::Def { .. } => DeclTag::DefDecl,
            DeclKind::Formula { .. } => DeclTag::FormulaDecl,
            DeclKind::Opaque { .. } => DeclTag::Opaque,
        }
    }

    pub fn is_formula(&self) -> bool {
        matches!(self, DeclKind::Formula { .. })
    }
}

/// A group of bound names sharing one (optional) type: `x, y: T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub names: Vec<String>,
    pub ty: Option<TypeExpr>,
}

impl Binding {
    pub fn typed(names: &[&str], ty: TypeExpr) -> Self {
        Binding {
            names: names.iter().map(|s| s.to_string()).collect(),
            ty: Some(ty),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeExpr {
    /// `T` or `set[T]`.
    Name {
        name: String,
        actuals: Vec<TypeExpr>,
        #[serde(default, skip_serializing)]
        loc: Loc,
    },
    /// `[D1, D2 -> R]`.
    Function { domain: Vec<TypeExpr>, range: Box<TypeExpr> },
    /// `[T1, T2]`, at least two components.
    Tuple(Vec<TypeExpr>),
    /// `{x: T | p}`.
    Subtype {
        var: String,
        base: Box<TypeExpr>,
        predicate: Box<Expr>,
    },
}

impl TypeExpr {
    pub fn name(name: impl Into<String>) -> Self {
        TypeExpr::Name {
            name: name.into(),
            actuals: Vec::new(),
            loc: Loc::none(),
        }
    }

    pub fn instance(name: impl Into<String>, actuals: Vec<TypeExpr>) -> Self {
        TypeExpr::Name {
            name: name.into(),
            actuals,
            loc: Loc::none(),
        }
    }

    pub fn function(domain: Vec<TypeExpr>, range: TypeExpr) -> Self {
        TypeExpr::Function {
            domain,
            range: Box::new(range),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub const ALL: [BinOp; 14] = [
        BinOp::And,
        BinOp::Or,
        BinOp::Implies,
        BinOp::Iff,
        BinOp::Eq,
        BinOp::Neq,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BinOp::And => "AND",
            BinOp::Or => "OR",
            BinOp::Implies => "IMPLIES",
            BinOp::Iff => "IFF",
            BinOp::Eq => "=",
            BinOp::Neq => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Iff => 1,
            BinOp::Implies => 2,
            BinOp::Or => 3,
            BinOp::And => 4,
            BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 6,
            BinOp::Add | BinOp::Sub => 7,
            BinOp::Mul | BinOp::Div => 8,
        }
    }

    pub fn right_assoc(self) -> bool {
        self == BinOp::Implies
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Forall,
    Exists,
    Lambda,
}

impl Quantifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantifier::Forall => "FORALL",
            Quantifier::Exists => "EXISTS",
            Quantifier::Lambda => "LAMBDA",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Name {
        name: String,
        actuals: Vec<TypeExpr>,
        #[serde(default, skip_serializing)]
        loc: Loc,
    },
    Number(String),
    Application { func: Box<Expr>, args: Vec<Expr> },
    Binder {
        quantifier: Quantifier,
        bindings: Vec<Binding>,
        body: Box<Expr>,
    },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
    Tuple(Vec<Expr>),
    SetComprehension { binding: Binding, predicate: Box<Expr> },
    IfThenElse {
        cond: Box<Expr>,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    Paren(Box<Expr>),
}

impl Expr {
    pub fn name(name: impl Into<String>) -> Self {
        Expr::Name {
            name: name.into(),
            actuals: Vec::new(),
            loc: Loc::none(),
        }
    }

    pub fn app(func: &str, args: Vec<Expr>) -> Self {
        Expr::Application {
            func: Box::new(Expr::name(func)),
            args,
        }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn paren(inner: Expr) -> Self {
        Expr::Paren(Box::new(inner))
    }

    /// Binding strength of the node as an operand; atoms are 10.
    pub fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Unary { op: UnOp::Not, .. } => 5,
            Expr::Unary { op: UnOp::Neg, .. } => 9,
            Expr::Binder { .. } => 0,
            _ => 10,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loc_is_ignored_by_equality() {
        let a = Expr::Name {
            name: "x".into(),
            actuals: vec![],
            loc: Loc(Some(Span {
                line: 3,
                column: 4,
                length: 1,
                offset: 20,
            })),
        };
        assert_eq!(a, Expr::name("x"));
        assert_ne!(a, Expr::name("y"));
    }

    #[test]
    fn precedence_table_is_ordered() {
        assert!(BinOp::Iff.precedence() < BinOp::Implies.precedence());
        assert!(BinOp::And.precedence() < BinOp::Eq.precedence());
        assert!(BinOp::Add.precedence() < BinOp::Mul.precedence());
    }
}
