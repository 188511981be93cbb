//! Random generators for subset theories.
//!
//! Trees are generated in canonical form: wherever the grammar would
//! re-associate an operand, the generator wraps it in an explicit
//! `Expr::Paren`, using its own precedence table. Untyped binding groups only
//! appear last in a binding list, since `(a, b: T)` means both are typed.

use mathpvs_core::pvs::*;
use proptest::prelude::*;

const POOL: &[&str] = &[
    "a", "b", "c", "x", "y", "z", "f", "g", "h", "p?", "q?", "s", "t1", "u_2", "member", "nat",
    "bool", "set", "emptyset", "mapping", "space", "P", "X", "Y", "Q", "k",
];

pub fn ident() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => proptest::sample::select(POOL).prop_map(str::to_owned),
        1 => "[a-zA-Z][a-zA-Z0-9_]{0,6}\\??".prop_filter("keyword", |s| Keyword::lookup(s).is_none()),
    ]
}

fn op_strength(op: BinOp) -> u8 {
    match op {
        BinOp::Iff => 1,
        BinOp::Implies => 2,
        BinOp::Or => 3,
        BinOp::And => 4,
        BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 6,
        BinOp::Add | BinOp::Sub => 7,
        BinOp::Mul | BinOp::Div => 8,
    }
}

fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => op_strength(*op),
        Expr::Unary { op: UnOp::Not, .. } => 5,
        Expr::Unary { op: UnOp::Neg, .. } => 9,
        Expr::Binder { .. } => 0,
        _ => 10,
    }
}

fn wrap_if(e: Expr, cond: bool) -> Expr {
    if cond {
        Expr::Paren(Box::new(e))
    } else {
        e
    }
}

pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    let p = op_strength(op);
    let right_assoc = op == BinOp::Implies;
    let ls = strength(&lhs);
    let rs = strength(&rhs);
    let lhs = wrap_if(lhs, ls < p || (ls == p && right_assoc));
    let rhs = wrap_if(rhs, rs < p || (rs == p && !right_assoc));
    Expr::binary(op, lhs, rhs)
}

pub fn unary(op: UnOp, operand: Expr) -> Expr {
    let p = if op == UnOp::Not { 5 } else { 9 };
    let s = strength(&operand);
    Expr::Unary {
        op,
        operand: Box::new(wrap_if(operand, s < p)),
    }
}

pub fn application(func: Expr, args: Vec<Expr>) -> Expr {
    let s = strength(&func);
    Expr::Application {
        func: Box::new(wrap_if(func, s < 10)),
        args,
    }
}

pub fn bindings(ty: BoxedStrategy<TypeExpr>) -> impl Strategy<Value = Vec<Binding>> {
    (
        prop::collection::vec(
            (prop::collection::vec(ident(), 1..3), ty.clone()).prop_map(|(names, t)| Binding {
                names,
                ty: Some(t),
            }),
            0..3,
        ),
        prop::option::of(prop::collection::vec(ident(), 1..3)),
    )
        .prop_filter_map("empty binding list", |(mut typed, untyped)| {
            if let Some(names) = untyped {
                typed.push(Binding { names, ty: None });
            }
            (!typed.is_empty()).then_some(typed)
        })
}

fn leaf_type() -> impl Strategy<Value = TypeExpr> {
    ident().prop_map(TypeExpr::name)
}

pub fn type_expr() -> BoxedStrategy<TypeExpr> {
    leaf_type()
        .prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                (ident(), prop::collection::vec(inner.clone(), 1..3))
                    .prop_map(|(n, a)| TypeExpr::instance(n, a)),
                (prop::collection::vec(inner.clone(), 1..3), inner.clone())
                    .prop_map(|(d, r)| TypeExpr::function(d, r)),
                prop::collection::vec(inner.clone(), 2..4).prop_map(TypeExpr::Tuple),
                (ident(), inner.clone(), leaf_expr()).prop_map(|(v, b, p)| TypeExpr::Subtype {
                    var: v,
                    base: Box::new(b),
                    predicate: Box::new(p),
                }),
            ]
        })
        .boxed()
}

fn leaf_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        4 => ident().prop_map(Expr::name),
        1 => (0u32..1000).prop_map(|n| Expr::Number(n.to_string())),
        1 => (ident(), prop::collection::vec(leaf_type(), 1..2)).prop_map(|(n, a)| Expr::Name {
            name: n,
            actuals: a,
            loc: Loc::none(),
        }),
    ]
}

pub fn expr() -> BoxedStrategy<Expr> {
    let simple_types = leaf_type().boxed();
    leaf_expr()
        .prop_recursive(5, 40, 4, move |inner| {
            let binder_types = simple_types.clone();
            prop_oneof![
                (proptest::sample::select(&BinOp::ALL[..]), inner.clone(), inner.clone())
                    .prop_map(|(op, l, r)| binary(op, l, r)),
                (prop_oneof![Just(UnOp::Not), Just(UnOp::Neg)], inner.clone())
                    .prop_map(|(op, e)| unary(op, e)),
                (inner.clone(), prop::collection::vec(inner.clone(), 1..3))
                    .prop_map(|(f, a)| application(f, a)),
                (
                    prop_oneof![
                        Just(Quantifier::Forall),
                        Just(Quantifier::Exists),
                        Just(Quantifier::Lambda)
                    ],
                    bindings(binder_types.clone()),
                    inner.clone()
                )
                    .prop_map(|(q, b, body)| Expr::Binder {
                        quantifier: q,
                        bindings: b,
                        body: Box::new(body),
                    }),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Tuple),
                (
                    prop::collection::vec(ident(), 1..3),
                    prop::option::of(binder_types.clone()),
                    inner.clone()
                )
                    .prop_map(|(names, ty, p)| Expr::SetComprehension {
                        binding: Binding { names, ty },
                        predicate: Box::new(p),
                    }),
                (inner.clone(), inner.clone(), inner.clone()).prop_map(|(c, t, e)| {
                    Expr::IfThenElse {
                        cond: Box::new(c),
                        then_branch: Box::new(t),
                        else_branch: Box::new(e),
                    }
                }),
                inner.clone().prop_map(|e| Expr::Paren(Box::new(e))),
            ]
        })
        .boxed()
}

fn formula_class() -> impl Strategy<Value = FormulaClass> {
    proptest::sample::select(vec![
        FormulaClass::Axiom,
        FormulaClass::Lemma,
        FormulaClass::Theorem,
        FormulaClass::Proposition,
        FormulaClass::Corollary,
        FormulaClass::Obligation,
    ])
}

pub fn decl_kind() -> impl Strategy<Value = DeclKind> {
    prop_oneof![
        any::<bool>().prop_map(|nonempty| DeclKind::UninterpretedType { nonempty }),
        (any::<bool>(), type_expr())
            .prop_map(|(nonempty, definition)| DeclKind::TypeDef { nonempty, definition }),
        type_expr().prop_map(|signature| DeclKind::Const { signature }),
        type_expr().prop_map(|signature| DeclKind::Var { signature }),
        (
            prop::option::of(bindings(type_expr())),
            type_expr(),
            expr()
        )
            .prop_map(|(params, signature, body)| DeclKind::Def {
                params: params.unwrap_or_default(),
                signature,
                body,
            }),
        (formula_class(), expr()).prop_map(|(class, body)| DeclKind::Formula { class, body }),
    ]
}

fn formal() -> impl Strategy<Value = FormalParam> {
    (
        ident(),
        prop_oneof![
            any::<bool>().prop_map(|nonempty| FormalKind::Type { nonempty }),
            type_expr().prop_map(FormalKind::Value),
        ],
    )
        .prop_map(|(name, kind)| FormalParam { name, kind })
}

pub fn theory() -> impl Strategy<Value = TheoryAst> {
    (
        ident(),
        prop::collection::vec(formal(), 0..3),
        prop::collection::vec(
            (ident(), prop::collection::vec(leaf_type(), 0..2)).prop_map(|(name, actuals)| {
                TheoryRef {
                    name,
                    actuals,
                    loc: Loc::none(),
                }
            }),
            0..3,
        ),
        prop::collection::vec((ident(), decl_kind()), 0..7),
    )
        .prop_map(|(name, formals, importings, decls)| {
            let mut ast = TheoryAst::new(name);
            ast.formals = formals;
            ast.importings = importings;
            ast.declarations = decls
                .into_iter()
                .map(|(name, kind)| Declaration {
                    name,
                    kind,
                    loc: Loc::none(),
                })
                .collect();
            ast
        })
}
